namespace MathLibrary {
class Arithmetic {
public:
  static int Add(int a, int b);
};
int Arithmetic::Add(int a, int b) { return a + b; }
} // namespace MathLibrary
