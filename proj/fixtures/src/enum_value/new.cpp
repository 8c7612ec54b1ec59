enum class Foo { ONE = 17, TWO, THREE };
void foo(Foo f) { (void)f; }
