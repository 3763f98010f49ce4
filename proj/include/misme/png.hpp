#pragma once

// PNG reader/writer with no external dependencies.
//
// Writing: 8-bit RGB, filter 0 scanlines, zlib stream built from stored
// (uncompressed) deflate blocks. Valid PNG, deterministic output.
//
// Reading: 8-bit gray / gray+alpha / RGB / RGBA, non-interlaced, any
// standards-conforming zlib stream (stored, fixed and dynamic Huffman
// blocks), all five scanline filters. Alpha is dropped, gray is widened.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/image.hpp"
#include "misme/util.hpp"

namespace misme::img {

namespace png_detail {

inline const std::array<std::uint32_t, 256>& crc_table() {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  return table;
}

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                           std::uint32_t crc = 0xFFFFFFFFu) {
  const auto& table = crc_table();
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc;
}

inline std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// zlib stream of stored deflate blocks.
inline std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> out;
  out.push_back(0x78);  // CM=8, CINFO=7
  out.push_back(0x01);  // no dict, fastest; (0x7801 % 31 == 0)
  std::size_t pos = 0;
  do {
    const std::size_t chunk = std::min<std::size_t>(raw.size() - pos, 65535);
    const bool final = pos + chunk == raw.size();
    out.push_back(final ? 0x01 : 0x00);  // BFINAL, BTYPE=00
    out.push_back(static_cast<std::uint8_t>(chunk & 0xFF));
    out.push_back(static_cast<std::uint8_t>(chunk >> 8));
    out.push_back(static_cast<std::uint8_t>(~chunk & 0xFF));
    out.push_back(static_cast<std::uint8_t>((~chunk >> 8) & 0xFF));
    out.insert(out.end(), raw.begin() + pos, raw.begin() + pos + chunk);
    pos += chunk;
  } while (pos < raw.size());
  put_be32(out, adler32(raw.data(), raw.size()));
  return out;
}

// --- inflate (RFC 1951) ---

class BitReader {
public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t bits(int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v |= static_cast<std::uint32_t>(bit()) << i;
    return v;
  }

  int bit() {
    if (pos_ >= size_) throw ParseError("deflate: out of input bits");
    const int b = (data_[pos_] >> nbit_) & 1;
    if (++nbit_ == 8) {
      nbit_ = 0;
      ++pos_;
    }
    return b;
  }

  void align_byte() {
    if (nbit_ != 0) {
      nbit_ = 0;
      ++pos_;
    }
  }

  const std::uint8_t* raw(std::size_t len) {
    if (pos_ + len > size_) throw ParseError("deflate: truncated stored block");
    const std::uint8_t* p = data_ + pos_;
    pos_ += len;
    return p;
  }

  std::size_t position() const { return pos_; }

private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  int nbit_ = 0;
};

struct Huffman {
  std::array<std::uint16_t, 16> counts{};  // codes per bit length
  std::vector<std::uint16_t> symbols;      // sorted by (length, symbol)

  static Huffman from_lengths(const std::uint8_t* lengths, std::size_t n) {
    Huffman h;
    for (std::size_t i = 0; i < n; ++i) h.counts[lengths[i]]++;
    h.counts[0] = 0;
    std::array<std::uint16_t, 16> offsets{};
    std::uint16_t total = 0;
    for (int len = 1; len < 16; ++len) {
      offsets[len] = total;
      total = static_cast<std::uint16_t>(total + h.counts[len]);
    }
    h.symbols.resize(total);
    for (std::size_t i = 0; i < n; ++i) {
      if (lengths[i] != 0) h.symbols[offsets[lengths[i]]++] = static_cast<std::uint16_t>(i);
    }
    return h;
  }

  int decode(BitReader& in) const {
    int code = 0, first = 0, index = 0;
    for (int len = 1; len < 16; ++len) {
      code |= in.bit();
      const int count = counts[len];
      if (code - first < count) return symbols[index + (code - first)];
      index += count;
      first = (first + count) << 1;
      code <<= 1;
    }
    throw ParseError("deflate: invalid Huffman code");
  }
};

inline std::vector<std::uint8_t> inflate(const std::uint8_t* data, std::size_t size) {
  static constexpr std::uint16_t kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                                 15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                                 67, 83, 99, 115, 131, 163, 195, 227, 258};
  static constexpr std::uint8_t kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                                 2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
  static constexpr std::uint16_t kDistBase[30] = {
      1,    2,    3,    4,    5,    7,     9,     13,    17,   25,   33,   49,   65,   97,  129,
      193,  257,  385,  513,  769,  1025,  1537,  2049,  3073, 4097, 6145, 8193, 12289, 16385, 24577};
  static constexpr std::uint8_t kDistExtra[30] = {0, 0, 0,  0,  1,  1,  2,  2,  3,  3,
                                                  4, 4, 5,  5,  6,  6,  7,  7,  8,  8,
                                                  9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

  BitReader in(data, size);
  std::vector<std::uint8_t> out;

  for (;;) {
    const int final = in.bit();
    const int type = static_cast<int>(in.bits(2));
    if (type == 0) {
      in.align_byte();
      const std::uint8_t* header = in.raw(4);
      const std::uint16_t len = static_cast<std::uint16_t>(header[0] | (header[1] << 8));
      const std::uint16_t nlen = static_cast<std::uint16_t>(header[2] | (header[3] << 8));
      if (static_cast<std::uint16_t>(~len) != nlen) throw ParseError("deflate: stored length check failed");
      const std::uint8_t* block = in.raw(len);
      out.insert(out.end(), block, block + len);
    } else if (type == 1 || type == 2) {
      Huffman litlen, dist;
      if (type == 1) {
        std::uint8_t lengths[288];
        for (int i = 0; i < 144; ++i) lengths[i] = 8;
        for (int i = 144; i < 256; ++i) lengths[i] = 9;
        for (int i = 256; i < 280; ++i) lengths[i] = 7;
        for (int i = 280; i < 288; ++i) lengths[i] = 8;
        litlen = Huffman::from_lengths(lengths, 288);
        std::uint8_t dlengths[30];
        for (auto& l : dlengths) l = 5;
        dist = Huffman::from_lengths(dlengths, 30);
      } else {
        const int hlit = static_cast<int>(in.bits(5)) + 257;
        const int hdist = static_cast<int>(in.bits(5)) + 1;
        const int hclen = static_cast<int>(in.bits(4)) + 4;
        static constexpr int kOrder[19] = {16, 17, 18, 0, 8, 7, 9, 6, 10, 5,
                                           11, 4,  12, 3, 13, 2, 14, 1, 15};
        std::uint8_t clen[19] = {};
        for (int i = 0; i < hclen; ++i) clen[kOrder[i]] = static_cast<std::uint8_t>(in.bits(3));
        const Huffman cl = Huffman::from_lengths(clen, 19);
        std::vector<std::uint8_t> lengths(hlit + hdist, 0);
        for (int i = 0; i < hlit + hdist;) {
          const int sym = cl.decode(in);
          if (sym < 16) {
            lengths[i++] = static_cast<std::uint8_t>(sym);
          } else if (sym == 16) {
            if (i == 0) throw ParseError("deflate: repeat with no previous length");
            const int repeat = 3 + static_cast<int>(in.bits(2));
            for (int r = 0; r < repeat && i < hlit + hdist; ++r, ++i) lengths[i] = lengths[i - 1];
          } else if (sym == 17) {
            i += 3 + static_cast<int>(in.bits(3));
          } else {
            i += 11 + static_cast<int>(in.bits(7));
          }
        }
        litlen = Huffman::from_lengths(lengths.data(), hlit);
        dist = Huffman::from_lengths(lengths.data() + hlit, hdist);
      }

      for (;;) {
        const int sym = litlen.decode(in);
        if (sym < 256) {
          out.push_back(static_cast<std::uint8_t>(sym));
        } else if (sym == 256) {
          break;
        } else {
          const int li = sym - 257;
          if (li >= 29) throw ParseError("deflate: bad length symbol");
          const std::size_t length = kLenBase[li] + in.bits(kLenExtra[li]);
          const int di = dist.decode(in);
          if (di >= 30) throw ParseError("deflate: bad distance symbol");
          const std::size_t distance = kDistBase[di] + in.bits(kDistExtra[di]);
          if (distance > out.size()) throw ParseError("deflate: distance beyond output");
          const std::size_t start = out.size() - distance;
          for (std::size_t i = 0; i < length; ++i) out.push_back(out[start + i]);
        }
      }
    } else {
      throw ParseError("deflate: reserved block type");
    }
    if (final) break;
  }
  return out;
}

inline std::vector<std::uint8_t> zlib_decompress(const std::uint8_t* data, std::size_t size) {
  if (size < 6) throw ParseError("zlib: stream too short");
  const unsigned cmf = data[0], flg = data[1];
  if ((cmf & 0x0F) != 8) throw ParseError("zlib: unsupported compression method");
  if (((cmf << 8) | flg) % 31 != 0) throw ParseError("zlib: bad header check");
  if (flg & 0x20) throw ParseError("zlib: preset dictionaries unsupported");
  auto out = inflate(data + 2, size - 6);
  const std::uint32_t expect = (static_cast<std::uint32_t>(data[size - 4]) << 24) |
                               (static_cast<std::uint32_t>(data[size - 3]) << 16) |
                               (static_cast<std::uint32_t>(data[size - 2]) << 8) |
                               static_cast<std::uint32_t>(data[size - 1]);
  if (adler32(out.data(), out.size()) != expect) throw ParseError("zlib: adler32 mismatch");
  return out;
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace png_detail

inline constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

inline void write_png(const std::filesystem::path& path, const Image& im) {
  using namespace png_detail;
  std::vector<std::uint8_t> file(kPngSignature, kPngSignature + 8);

  auto chunk = [&file](const char type[4], const std::vector<std::uint8_t>& data) {
    put_be32(file, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = file.size();
    file.insert(file.end(), type, type + 4);
    file.insert(file.end(), data.begin(), data.end());
    const std::uint32_t crc = crc32(file.data() + type_pos, 4 + data.size()) ^ 0xFFFFFFFFu;
    put_be32(file, crc);
  };

  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(im.width));
  put_be32(ihdr, static_cast<std::uint32_t>(im.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  chunk("IHDR", ihdr);

  std::vector<std::uint8_t> raw;
  raw.reserve(im.height * (1 + im.width * 3));
  for (std::size_t y = 0; y < im.height; ++y) {
    raw.push_back(0);  // filter: none
    const std::uint8_t* row = im.pixels.data() + y * im.width * 3;
    raw.insert(raw.end(), row, row + im.width * 3);
  }
  chunk("IDAT", zlib_store(raw));
  chunk("IEND", {});

  write_text_file(path, std::string_view(reinterpret_cast<const char*>(file.data()), file.size()));
}

inline Image decode_png(const std::uint8_t* data, std::size_t size, const std::string& origin) {
  using namespace png_detail;
  if (size < 8 || std::memcmp(data, kPngSignature, 8) != 0) {
    throw ParseError(origin + ": not a PNG file");
  }

  std::size_t pos = 8;
  std::size_t width = 0, height = 0;
  int bit_depth = 0, color_type = -1;
  std::vector<std::uint8_t> idat;
  bool saw_end = false;

  auto be32 = [&](std::size_t at) {
    return (static_cast<std::uint32_t>(data[at]) << 24) | (static_cast<std::uint32_t>(data[at + 1]) << 16) |
           (static_cast<std::uint32_t>(data[at + 2]) << 8) | static_cast<std::uint32_t>(data[at + 3]);
  };

  while (pos + 8 <= size && !saw_end) {
    const std::uint32_t len = be32(pos);
    if (pos + 12 + len > size) throw ParseError(origin + ": truncated chunk");
    const std::string type(reinterpret_cast<const char*>(data + pos + 4), 4);
    const std::uint8_t* payload = data + pos + 8;
    if (type == "IHDR") {
      if (len != 13) throw ParseError(origin + ": bad IHDR length");
      width = be32(pos + 8);
      height = be32(pos + 12);
      bit_depth = payload[8];
      color_type = payload[9];
      if (payload[12] != 0) throw ParseError(origin + ": interlaced PNG unsupported");
      if (bit_depth != 8) throw ParseError(origin + ": only 8-bit PNG supported");
      if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6) {
        throw ParseError(origin + ": unsupported color type " + std::to_string(color_type));
      }
    } else if (type == "IDAT") {
      idat.insert(idat.end(), payload, payload + len);
    } else if (type == "IEND") {
      saw_end = true;
    }
    pos += 12 + len;
  }
  if (width == 0 || height == 0 || color_type < 0) throw ParseError(origin + ": missing IHDR");
  if (idat.empty()) throw ParseError(origin + ": missing IDAT");

  const std::size_t channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 4 ? 2 : 4;
  auto raw = zlib_decompress(idat.data(), idat.size());
  const std::size_t stride = width * channels;
  if (raw.size() != height * (stride + 1)) {
    throw ParseError(origin + ": decompressed size mismatch");
  }

  // Defilter in place over a copy without filter bytes.
  std::vector<std::uint8_t> flat(height * stride);
  for (std::size_t y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = raw.data() + y * (stride + 1) + 1;
    std::uint8_t* dst = flat.data() + y * stride;
    const std::uint8_t* above = y > 0 ? flat.data() + (y - 1) * stride : nullptr;
    for (std::size_t x = 0; x < stride; ++x) {
      const int a = x >= channels ? dst[x - channels] : 0;
      const int b = above ? above[x] : 0;
      const int c = (above && x >= channels) ? above[x - channels] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw ParseError(origin + ": unknown scanline filter " + std::to_string(filter));
      }
      dst[x] = static_cast<std::uint8_t>(v & 0xFF);
    }
  }

  Image im(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::uint8_t* px = flat.data() + y * stride + x * channels;
      if (channels >= 3) {
        im.at(y, x, 0) = px[0];
        im.at(y, x, 1) = px[1];
        im.at(y, x, 2) = px[2];
      } else {
        im.at(y, x, 0) = im.at(y, x, 1) = im.at(y, x, 2) = px[0];
      }
    }
  }
  return im;
}

inline Image read_png(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  return decode_png(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size(), path.string());
}

// Reads PNG or PPM (P6), dispatching on the magic bytes.
inline Image read_image(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return decode_png(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size(), path.string());
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    std::istringstream in(bytes);
    return read_ppm_stream(in, path.string());
  }
  throw ParseError(path.string() + ": unrecognized image format (expected PNG or P6 PPM)");
}

}  // namespace misme::img
