// bounded counter that stops at 10
system p1 {
  var x: int[0,20];
  init: x = 0;
  next: x < 10 && x' = x + 1;
  safe: x <= 10;
}
