struct Base { double x; };
struct Derived : Base {};
void foo(Derived *d) { (void)d; }
