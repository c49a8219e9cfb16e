// two counters in lockstep; safety needs a relational invariant
system line {
  var x: int[0,10];
  var y: int[0,10];
  init: x = 0 && y = 0;
  next: x < 5 && x' = x + 1 && y' = y + 1;
  safe: x <= y;
}
