struct Base {
  virtual void bar();
  virtual void baz();
};
void Base::bar() {}
void Base::baz() {}
void foo(Base *b) { (void)b; }
