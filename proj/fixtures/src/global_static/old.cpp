int x = 1;
int y = 2;
int get_y() { return y; }
