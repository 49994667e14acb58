#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_padbench, m) {
  m.doc() = "iris presentation-attack detection benchmark core";
}
