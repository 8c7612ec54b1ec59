// Type shapes exercised by the corpus unit tests.
typedef int U;
typedef U T;
T use_t(T v) { return v; }

struct Node {
  Node *next;
  int value;
};
int walk(Node *n) { return n ? n->value : 0; }

struct Base { int x; };
struct Derived : Base { long extra; };
void take(Derived *d) { (void)d; }

struct Iso1 { int a; int b; };
struct Iso2 { int c; int d; };
void iso(Iso1 a, Iso2 b) { (void)a; (void)b; }

typedef struct { int q; } Anon;
void anon(Anon *a) { (void)a; }

struct Bits {
  unsigned lo : 3;
  unsigned hi : 5;
  unsigned char tail;
};
void bits(Bits b) { (void)b; }

union Num {
  int i;
  float f;
};
void num(Num n) { (void)n; }

struct Buffer {
  char data[16];
  int (*callback)(int);
  const char *label;
};
void buffer(const Buffer &b) { (void)b; }

namespace outer {
namespace inner {
struct Widget { virtual ~Widget(); virtual int draw(int scale) const; int id; };
Widget::~Widget() {}
int Widget::draw(int scale) const { return id * scale; }
} // namespace inner
} // namespace outer

enum Mode { OFF = 0, ON = 1, AUTO = 7 };
Mode toggle(Mode m) { return m == ON ? OFF : ON; }

int exported_counter = 3;
static int hidden_counter = 4;
int read_hidden() { return hidden_counter; }

__attribute__((visibility("hidden"))) int internal_helper(int v) { return v + 1; }
int call_helper(int v) { return internal_helper(v); }
