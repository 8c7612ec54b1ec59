struct S { int x; double d; };
S foo() { return S{1, 2.0}; }
