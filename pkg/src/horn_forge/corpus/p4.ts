// stutters forever
system p4 {
  var x: int[0,10];
  init: x = 0;
  next: x' = x;
  safe: x <= 5;
}
