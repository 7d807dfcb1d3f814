#include <cstdio>

int main() {
  std::fprintf(stderr, "tgm: command-line surface not wired up yet\n");
  return 2;
}
