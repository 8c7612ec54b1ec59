struct S { int x; char *p; };
void foo(S s) { (void)s; }
