// PNG fixtures produced by a general-purpose zlib encoder: a dynamic-
// Huffman stream with unfiltered rows, a fixed-Huffman stream whose rows
// use scanline filters 1-4, an 8-bit grayscale image and an RGBA image.
// Pixel values follow simple formulas so tests can verify content
// without a second copy of the data.
#pragma once

inline constexpr unsigned char kPngFixtureDynamic[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x18, 0x00, 0x00, 0x00, 0x10, 0x08, 0x02, 0x00, 0x00, 0x00, 0x83,
    0x46, 0x28, 0xc2, 0x00, 0x00, 0x03, 0x45, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x0d, 0x90,
    0x91, 0xba, 0xf5, 0x3a, 0x14, 0x00, 0x17, 0x5c, 0x28, 0x04, 0x0a, 0x07, 0x02, 0x1b, 0x0a,
    0x81, 0xc0, 0x86, 0x40, 0x21, 0x10, 0x08, 0x14, 0x16, 0x14, 0x02, 0x81, 0x40, 0x21, 0x50,
    0x08, 0x04, 0x0a, 0x1b, 0x02, 0x1b, 0x0a, 0x81, 0xc2, 0x81, 0xc0, 0x0f, 0x85, 0x42, 0x31,
    0x58, 0x28, 0xf4, 0xf1, 0xee, 0x79, 0x81, 0xf9, 0x66, 0x06, 0x00, 0xa0, 0x81, 0xff, 0x5a,
    0x68, 0x28, 0x90, 0x0e, 0x5a, 0x0e, 0x3f, 0x02, 0xa8, 0x84, 0x97, 0x86, 0x0e, 0x81, 0x19,
    0xe0, 0x0e, 0xde, 0x1e, 0x44, 0x80, 0x7e, 0x01, 0x99, 0x40, 0xad, 0xa0, 0x37, 0x18, 0x0a,
    0xe0, 0x0e, 0xe3, 0x09, 0xa6, 0x82, 0xbd, 0xc0, 0x3d, 0x30, 0x01, 0x90, 0xff, 0x1a, 0xd2,
    0xb4, 0x84, 0x50, 0xd2, 0x76, 0xe4, 0x87, 0x13, 0x2a, 0xc8, 0x4b, 0x92, 0x4e, 0x13, 0x86,
    0x84, 0x1b, 0xf2, 0x76, 0x44, 0x78, 0xd2, 0x07, 0x22, 0x17, 0xa2, 0x12, 0xd1, 0x2b, 0x19,
    0x36, 0x82, 0x85, 0x8c, 0x3b, 0x31, 0x27, 0xb1, 0x95, 0xb8, 0x8b, 0x4c, 0x0f, 0xf1, 0x00,
    0xb4, 0x69, 0xfe, 0x18, 0xb4, 0xa5, 0xf4, 0xa7, 0xa3, 0x94, 0xd3, 0x97, 0xa0, 0x9d, 0xa4,
    0x4c, 0x53, 0x8e, 0xf4, 0x6d, 0xa8, 0x70, 0xb4, 0xf7, 0x54, 0x06, 0xaa, 0x16, 0xaa, 0x13,
    0x1d, 0x56, 0x8a, 0x1b, 0x1d, 0x0b, 0x35, 0x3b, 0xb5, 0x27, 0x75, 0x95, 0x4e, 0x17, 0xf5,
    0x0f, 0x9d, 0x01, 0x18, 0x69, 0x58, 0xdb, 0xb2, 0x1f, 0xca, 0x68, 0xc7, 0x5e, 0x9c, 0x75,
    0x82, 0x31, 0xc9, 0xb8, 0x66, 0x6f, 0x64, 0xc2, 0xb0, 0xde, 0x31, 0xe9, 0x99, 0x0a, 0x4c,
    0x2f, 0x6c, 0x48, 0x0c, 0x57, 0x36, 0x6e, 0xcc, 0x14, 0x66, 0x77, 0xe6, 0x4e, 0x36, 0x55,
    0xe6, 0x2f, 0x36, 0x3f, 0x2c, 0x00, 0x88, 0xb6, 0x11, 0x3f, 0xad, 0xa0, 0x54, 0xbc, 0x3a,
    0xd1, 0x71, 0xc1, 0x84, 0xe0, 0x52, 0xbc, 0xb5, 0x10, 0x28, 0x7a, 0x23, 0xa4, 0x13, 0xca,
    0x0b, 0x1d, 0xc4, 0xb0, 0x08, 0x4c, 0x62, 0x5c, 0x85, 0xd9, 0x84, 0x2d, 0xc2, 0xed, 0x62,
    0x3a, 0x85, 0xaf, 0x62, 0xbe, 0x44, 0x78, 0x44, 0x04, 0x50, 0x3f, 0x8d, 0xa2, 0xad, 0x7a,
    0x51, 0xd5, 0x75, 0x8a, 0x71, 0xc5, 0x85, 0x7a, 0x4b, 0x25, 0xb4, 0xea, 0x51, 0x49, 0xa3,
    0x94, 0x53, 0xda, 0xab, 0x21, 0x28, 0x5c, 0xd4, 0x98, 0x94, 0x59, 0x95, 0xdd, 0x94, 0x2b,
    0x6a, 0xda, 0x95, 0x3f, 0xd5, 0x5c, 0x55, 0xb8, 0x54, 0x7c, 0xd4, 0x02, 0x80, 0xb4, 0xc1,
    0x57, 0x8b, 0x1d, 0x45, 0xd6, 0x21, 0xe7, 0xf8, 0xfe, 0x33, 0x91, 0xd8, 0x6b, 0x94, 0x88,
    0xca, 0xa0, 0x76, 0x38, 0x78, 0xc4, 0x80, 0xe3, 0x82, 0x26, 0xa1, 0x5d, 0xd1, 0x6d, 0x38,
    0x15, 0xf4, 0x3b, 0xce, 0x27, 0x86, 0x8a, 0xf1, 0xc2, 0xe5, 0xc1, 0x0f, 0x80, 0x7d, 0x35,
    0xb6, 0x6b, 0x2d, 0xa3, 0x96, 0x77, 0xf6, 0xcd, 0xad, 0x10, 0xb6, 0x97, 0x56, 0x6a, 0xab,
    0xd0, 0x6a, 0x63, 0x07, 0x67, 0xd1, 0xdb, 0x31, 0x58, 0xb3, 0x58, 0x9b, 0xac, 0x5b, 0xed,
    0xb4, 0x59, 0x5f, 0xec, 0xbc, 0xdb, 0x70, 0xda, 0x58, 0xed, 0x72, 0xd9, 0xcf, 0x63, 0x13,
    0x80, 0xef, 0x1a, 0xcf, 0x5a, 0xcf, 0xa9, 0x7f, 0x77, 0x5e, 0x70, 0xdf, 0x0b, 0x2f, 0xa5,
    0xff, 0xeb, 0xd1, 0xe8, 0x07, 0xe3, 0xd1, 0xf9, 0xd1, 0x7b, 0x13, 0xbc, 0x5d, 0xbc, 0x4b,
    0x7e, 0x5a, 0xbd, 0xdf, 0xfc, 0x5c, 0x7c, 0xd8, 0x7d, 0x3c, 0xfd, 0x52, 0xfd, 0xe7, 0xf2,
    0xe9, 0xf1, 0x5f, 0x80, 0xc8, 0x9a, 0xc8, 0xdb, 0xf8, 0xa6, 0x51, 0x74, 0xb1, 0xe7, 0x51,
    0x8a, 0xa8, 0x64, 0xd4, 0x3a, 0x0e, 0x18, 0xd1, 0xc4, 0xd1, 0x45, 0xe3, 0xa3, 0x0d, 0xd1,
    0x2d, 0x71, 0x4a, 0xd1, 0xaf, 0x71, 0xde, 0x62, 0x28, 0x31, 0xee, 0x71, 0x39, 0xe3, 0xa7,
    0xc6, 0x74, 0xc5, 0xef, 0x13, 0x57, 0x80, 0xc4, 0x9b, 0xf4, 0x6e, 0x93, 0xa0, 0xa9, 0xef,
    0x92, 0xe4, 0x49, 0x89, 0xa4, 0x65, 0x1a, 0x74, 0x42, 0x4c, 0xa3, 0x49, 0xc6, 0x25, 0xeb,
    0x93, 0x0b, 0x69, 0x5a, 0x92, 0x4f, 0x69, 0x5e, 0x53, 0xd8, 0x52, 0x2c, 0x69, 0xd9, 0xd3,
    0xe7, 0x4c, 0xa9, 0xa6, 0xef, 0x95, 0xd6, 0x27, 0x65, 0x80, 0xfc, 0x6e, 0xb2, 0x68, 0x73,
    0x4f, 0xb3, 0xec, 0xb2, 0xe2, 0x59, 0x8b, 0x3c, 0xc8, 0x8c, 0x3a, 0x8f, 0x98, 0x8d, 0xc9,
    0xd6, 0x65, 0xe7, 0xf3, 0x14, 0xb2, 0x5f, 0xf2, 0x9c, 0x72, 0x58, 0x73, 0xdc, 0xf2, 0x52,
    0xf2, 0x67, 0xcf, 0xe9, 0xcc, 0xdf, 0x9a, 0xd7, 0x2b, 0xe7, 0x27, 0x6f, 0x00, 0x45, 0x34,
    0xa5, 0x6f, 0x8b, 0xa4, 0x45, 0x75, 0x45, 0xf3, 0x32, 0x88, 0x82, 0xb2, 0x8c, 0xba, 0x18,
    0x2c, 0xd6, 0x14, 0xe7, 0xca, 0xe4, 0xff, 0x96, 0x94, 0x79, 0x29, 0x21, 0x95, 0xb8, 0x96,
    0x65, 0x2b, 0x9f, 0x52, 0xd2, 0x5e, 0xbe, 0x67, 0x59, 0x6b, 0xc9, 0x57, 0xd9, 0x9e, 0xf2,
    0x0b, 0x70, 0xf4, 0xcd, 0x21, 0xdb, 0x43, 0xd1, 0x43, 0x77, 0xc7, 0xc0, 0x0f, 0x14, 0xc7,
    0x28, 0x0f, 0xa3, 0x0f, 0x8b, 0x87, 0x33, 0xc7, 0xe4, 0x0e, 0xef, 0x8f, 0x39, 0x1c, 0x61,
    0x39, 0x62, 0x3a, 0x96, 0xf5, 0xf8, 0x6c, 0x47, 0x2a, 0xc7, 0x77, 0x3f, 0xd6, 0xf3, 0xc8,
    0xf5, 0xd8, 0xae, 0xe3, 0xf7, 0x39, 0x0a, 0x40, 0x95, 0x4d, 0x55, 0x6d, 0xd5, 0xb4, 0x0e,
    0x5d, 0x45, 0x5e, 0x47, 0x51, 0x8d, 0xac, 0x56, 0x57, 0x87, 0x75, 0x32, 0xd5, 0xbb, 0x3a,
    0xfb, 0x1a, 0x42, 0x8d, 0x4b, 0x5d, 0x52, 0xfd, 0xac, 0x35, 0x6d, 0xf5, 0x5b, 0xea, 0xba,
    0xd7, 0x7c, 0xd6, 0xad, 0xd6, 0xdf, 0xab, 0x96, 0xa7, 0xfe, 0x03, 0xb8, 0x55, 0x73, 0xeb,
    0xf6, 0x1e, 0xe8, 0x8d, 0xdd, 0x3d, 0xf2, 0xdb, 0x88, 0xdb, 0xca, 0xdb, 0xe9, 0x7b, 0xc2,
    0xdb, 0x9b, 0x7b, 0x76, 0x77, 0xf0, 0x77, 0x0c, 0xf7, 0xb2, 0xdc, 0x9f, 0x74, 0xa7, 0xf5,
    0xfe, 0x6e, 0xf7, 0x5a, 0xee, 0xbc, 0xdf, 0xdb, 0x79, 0xff, 0xd6, 0xbb, 0x5c, 0xf7, 0xbf,
    0xe7, 0xde, 0xff, 0x07, 0x95, 0xa9, 0x83, 0x10, 0x40, 0x5f, 0xe4, 0x16, 0x00, 0x00, 0x00,
    0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82
};

inline constexpr unsigned char kPngFixtureFiltered[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x05, 0x00, 0x00, 0x00, 0x04, 0x08, 0x02, 0x00, 0x00, 0x00, 0xc9,
    0x51, 0x62, 0x17, 0x00, 0x00, 0x00, 0x24, 0x49, 0x44, 0x41, 0x54, 0x78, 0x01, 0x63, 0x64,
    0x60, 0x38, 0xa1, 0x21, 0xf8, 0x12, 0x8e, 0x98, 0xb8, 0x6c, 0x7e, 0x22, 0x23, 0x66, 0xfe,
    0xa8, 0x28, 0x49, 0xf5, 0x8f, 0x70, 0xc4, 0x02, 0x12, 0x16, 0x44, 0x20, 0x00, 0xc0, 0xfb,
    0x16, 0xac, 0xc1, 0x61, 0xc4, 0xe4, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae,
    0x42, 0x60, 0x82
};

inline constexpr unsigned char kPngFixtureGray[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x07, 0x00, 0x00, 0x00, 0x05, 0x08, 0x00, 0x00, 0x00, 0x00, 0xac,
    0xf1, 0xa9, 0x04, 0x00, 0x00, 0x00, 0x33, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x01, 0x28,
    0x00, 0xd7, 0xff, 0x00, 0x00, 0x1f, 0x3e, 0x5d, 0x7c, 0x9b, 0xba, 0x00, 0x11, 0x30, 0x4f,
    0x6e, 0x8d, 0xac, 0xcb, 0x00, 0x22, 0x41, 0x60, 0x7f, 0x9e, 0xbd, 0xdc, 0x00, 0x33, 0x52,
    0x71, 0x90, 0xaf, 0xce, 0xed, 0x00, 0x44, 0x63, 0x82, 0xa1, 0xc0, 0xdf, 0xfe, 0x25, 0x57,
    0x11, 0x5e, 0xd5, 0x43, 0xa9, 0x1b, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae,
    0x42, 0x60, 0x82
};

inline constexpr unsigned char kPngFixtureRgba[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x06, 0x00, 0x00, 0x00, 0x04, 0x08, 0x06, 0x00, 0x00, 0x00, 0xad,
    0x04, 0x4e, 0x43, 0x00, 0x00, 0x00, 0x6c, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x63, 0x60,
    0x00, 0x02, 0x6e, 0x56, 0x26, 0x0d, 0x31, 0x2e, 0x96, 0x00, 0x45, 0x7e, 0xb6, 0x0a, 0x1d,
    0x11, 0x8e, 0x05, 0xe6, 0x92, 0x5c, 0x27, 0x18, 0x98, 0x65, 0x79, 0x35, 0xf8, 0x94, 0xf8,
    0x03, 0x24, 0xd5, 0x05, 0x2b, 0x54, 0x74, 0x84, 0x17, 0xe8, 0x1b, 0x8a, 0x9e, 0xb0, 0x32,
    0x13, 0xff, 0xc0, 0xc0, 0x66, 0x25, 0x15, 0x20, 0x68, 0x2f, 0x53, 0x21, 0xe3, 0x22, 0xb7,
    0x40, 0xdd, 0x53, 0xe1, 0x84, 0x91, 0x9f, 0xd2, 0x07, 0xdb, 0x60, 0x15, 0x09, 0x06, 0xce,
    0x70, 0xf5, 0x0a, 0x91, 0x18, 0xcd, 0x05, 0xf2, 0x89, 0xda, 0x27, 0xb4, 0xd2, 0x74, 0x3f,
    0x98, 0x66, 0xeb, 0x4b, 0x38, 0x14, 0x18, 0x3a, 0x00, 0x00, 0x94, 0xed, 0x16, 0x8d, 0x3f,
    0x80, 0x9b, 0x44, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82
};
