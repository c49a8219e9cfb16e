// nondeterministic climb that stops before 16
system nondet {
  var x: int[0,20];
  init: x >= 0 && x <= 3;
  next: x < 15 && (x' = x + 1 || x' = x + 2);
  safe: x <= 16;
  p: x <= 16;
  q: x = 16;
}
