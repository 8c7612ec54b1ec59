struct Base { virtual void bar(); };
void Base::bar() {}
void foo(Base *b) { (void)b; }
