struct Base { int x; };
struct Derived : Base {};
void foo(Derived *d) { (void)d; }
