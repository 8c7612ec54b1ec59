struct Point { int x; int y; };
enum Color { RED, GREEN, BLUE };
int area(const Point *p) { return p->x * p->y; }
Color pick(Color c) { return c; }
int shared_counter = 0;
