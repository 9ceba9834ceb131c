struct Potato {
  bool isMashed;
};
void dont_be_here();
int patatino_a;
void patatino() {
  if (patatino_a && patatino_a % 2 == 0)
    ;
  else {
    Potato spud;
    int spud_0 = patatino_a;
    spud.isMashed = false;
    for (int k = 0; patatino_a == 0 && spud_0 > 1000; k++)
      for (int l = 0; l < 5; l++)
        spud_0 += l * k;
    for (; spud_0;)
      dont_be_here();
  }
}
