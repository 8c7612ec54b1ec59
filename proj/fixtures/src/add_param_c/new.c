int Add(double a, double b) { return (int)(a + b); }
