struct S { int x; double d; };
void foo(S s) { (void)s; }
