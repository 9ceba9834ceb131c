long f() {
  long x = 0;
  while (x < 10) {
    if (x % 2 == 0) { x += 2; }
    else { x += 1; }

    if ((x > 20) && (x % 5 == 0)) { x -= 5; }
    if ((x < -5) && (x % 3 == 0)) { x += 3; }
  }
  return x;
}
