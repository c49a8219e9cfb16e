// bounces between 2 and 3 forever
system cycle {
  var x: int[0,6];
  init: x = 0;
  next: (x < 3 && x' = x + 1) || (x = 3 && x' = 2);
  safe: x <= 3;
}
