namespace MathLibrary {
class Arithmetic {
public:
  static int Add(double a, double b);
};
int Arithmetic::Add(double a, double b) { return static_cast<int>(a + b); }
} // namespace MathLibrary
