// down-counter from an arbitrary start
system p3 {
  var x: int[-10,100];
  init: x <= 100;
  next: x > 0 && x' = x - 1;
  safe: x >= -10;
}
