// environment may stall or push; the system moves at most 2 per round
system p7 {
  var x: int[0,5];
  init: x = 3;
  env: x' = x || x' = x + 1;
  goal: x >= 5;
}
