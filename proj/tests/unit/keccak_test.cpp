#include <gtest/gtest.h>

#include "xchain/crypto/keccak.hpp"

using namespace xchain;
using namespace xchain::crypto;

TEST(Keccak256, EmptyInput) {
  EXPECT_EQ(keccak256(std::string_view{}).hex(),
            "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
}

TEST(Keccak256, ShortAscii) {
  EXPECT_EQ(keccak256(std::string_view{"abc"}).hex(),
            "0x4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Keccak256, IncrementalMatchesOneShot) {
  std::string text(1000, 'x');
  for (std::size_t i = 0; i < text.size(); ++i) text[i] = static_cast<char>('a' + i % 26);
  Keccak256 h;
  for (std::size_t off = 0; off < text.size(); off += 37) {
    auto piece = std::string_view(text).substr(off, 37);
    h.update(to_bytes(piece));
  }
  EXPECT_EQ(h.finalize(), keccak256(std::string_view(text)));
}

TEST(Keccak256, RateBoundaryLengths) {
  // Lengths around the 136-byte block exercise the padding edge cases.
  for (std::size_t n : {135u, 136u, 137u, 272u}) {
    std::string s(n, 'q');
    Keccak256 h;
    h.update(to_bytes(std::string_view(s).substr(0, n / 2)));
    h.update(to_bytes(std::string_view(s).substr(n / 2)));
    EXPECT_EQ(h.finalize(), keccak256(std::string_view(s))) << n;
  }
}
