// the counter reaches 10, which the property forbids
system p2 {
  var x: int[0,20];
  init: x = 0;
  next: x < 10 && x' = x + 1;
  safe: x < 10;
}
