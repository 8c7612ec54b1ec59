struct Base { virtual void baz(); };
void Base::baz() {}
void foo(Base *b) { (void)b; }
