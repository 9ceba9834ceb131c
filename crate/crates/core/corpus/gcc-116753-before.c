long f() {
  long x = 0;
  while (x < 10) {
    if (x % 2 == 0) { x += 2; }
    else { x += 1; }
  }
  return x;
}
