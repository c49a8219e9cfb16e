// the target lies outside the state space
system p6_unreach {
  var x: int[0,10];
  init: x = 0;
  next: x' = x + 1;
  p: x < 5;
  q: x = -1;
}
