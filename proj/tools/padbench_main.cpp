#include <iostream>

int main() {
  std::cout << "padbench CLI placeholder\n";
  return 0;
}
