enum class Foo { ONE, TWO, THREE };
void foo(Foo f) { (void)f; }
