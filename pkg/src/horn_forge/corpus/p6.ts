// climb until x = 5
system p6 {
  var x: int[0,10];
  init: x = 0;
  next: x' = x + 1;
  p: x < 5;
  q: x = 5;
}
