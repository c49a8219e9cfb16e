// environment always resets to 3; one system step cannot reach 9
system p7_reset {
  var x: int[0,10];
  init: x = 0;
  env: x' = 3;
  goal: x >= 9;
}
