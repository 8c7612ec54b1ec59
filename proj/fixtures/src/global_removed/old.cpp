int x = 1;
int z = 3;
