int f(int a) {
  int arr[5];
  for (int i = 0; i < 5; i++) {
    if (i % 2 == 0) {
      arr[i] = a + i * 2;
    } else {
      arr[i] = a + i;
    }
  }
  return arr[2];
}
