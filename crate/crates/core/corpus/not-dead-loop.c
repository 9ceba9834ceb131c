int f(void) {
  int a = 0;
  for (;;) {
    a += 1;
    a -= 1;
  }
}
