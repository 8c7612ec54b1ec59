namespace MathLibrary {
double scale(double v, int factor) { return v * factor; }
int counter = 0;
} // namespace MathLibrary
