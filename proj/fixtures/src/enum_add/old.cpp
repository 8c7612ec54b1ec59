enum class Foo { ONE, TWO };
void foo(Foo f) { (void)f; }
