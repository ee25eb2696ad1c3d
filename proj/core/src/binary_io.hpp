#pragma once

// Little-endian primitive encoding shared by the dataset and weights formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "modcomp/errors.hpp"

namespace modcomp::binary {

template <class T>
  requires std::is_integral_v<T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out = static_cast<T>((out << 8) | ((v >> (8 * i)) & 0xff));
    }
    return out;
  }
}

template <class T>
  requires std::is_integral_v<T>
void put(std::ostream& os, T v) {
  const T le = to_little(v);
  os.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

inline void put_f64(std::ostream& os, double v) { put(os, std::bit_cast<std::uint64_t>(v)); }

template <class T>
  requires std::is_integral_v<T>
T get(std::istream& is) {
  T le{};
  if (!is.read(reinterpret_cast<char*>(&le), sizeof(T))) {
    throw FormatError("unexpected end of file");
  }
  return to_little(le);
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get<std::uint64_t>(is)); }

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char buf[4]{};
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw FormatError(std::string("bad magic; expected ") + magic);
  }
}

}  // namespace modcomp::binary
