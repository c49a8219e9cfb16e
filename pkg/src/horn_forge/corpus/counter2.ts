// y grows twice as fast and overshoots 12
system counter2 {
  var x: int[0,15];
  var y: int[0,15];
  init: x = 0 && y = 0;
  next: x < 7 && x' = x + 1 && y' = y + 2;
  safe: y <= 12;
}
