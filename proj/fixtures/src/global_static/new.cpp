int x = 1;
static int y = 2;
int get_y() { return y; }
