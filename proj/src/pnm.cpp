#include "bmc/pnm.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "bmc/error.hpp"

namespace bmc {

namespace {

struct Header {
    int width = 0;
    int height = 0;
    std::size_t payload_offset = 0;
};

class HeaderParser {
public:
    explicit HeaderParser(std::span<const std::uint8_t> b) : bytes_(b) {}

    void expect_magic(const char* magic) {
        if (bytes_.size() < 2 || bytes_[0] != magic[0] || bytes_[1] != magic[1])
            throw FormatError(std::string("bad magic number, expected ") + magic, 0);
        pos_ = 2;
    }

    int number() {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) throw FormatError("header number too large", start);
            ++pos_;
        }
        if (pos_ == start) throw FormatError("expected a decimal header field", start);
        last_start_ = start;
        return static_cast<int>(v);
    }

    std::size_t single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw FormatError("expected whitespace before payload", pos_);
        return pos_ + 1;
    }

    /// Offset of the first digit of the last number read.
    std::size_t last_start() const { return last_start_; }

private:
    void skip_space_and_comments() {
        const std::size_t start = pos_;
        bool any = false;
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
                any = true;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
                any = true;
            } else {
                break;
            }
        }
        if (!any) throw FormatError("expected whitespace between header fields", start);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::size_t last_start_ = 0;
};

Header parse_header(std::span<const std::uint8_t> bytes, const char* magic, std::size_t channels) {
    HeaderParser p(bytes);
    p.expect_magic(magic);
    Header h;
    h.width = p.number();
    if (h.width < 1) throw FormatError("image width must be positive", p.last_start());
    h.height = p.number();
    if (h.height < 1) throw FormatError("image height must be positive", p.last_start());
    const int maxval = p.number();
    if (maxval != 255) throw FormatError("maxval must be 255, got " + std::to_string(maxval), p.last_start());
    h.payload_offset = p.single_space();
    const std::size_t need = channels * static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() - h.payload_offset < need)
        throw FormatError("truncated payload: expected " + std::to_string(need) + " bytes, found " +
                              std::to_string(bytes.size() - h.payload_offset),
                          bytes.size());
    return h;
}

Bytes header_bytes(const char* magic, int w, int h) {
    const std::string s = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    return Bytes(s.begin(), s.end());
}

}  // namespace

RgbImage read_ppm(std::span<const std::uint8_t> bytes) {
    const Header h = parse_header(bytes, "P6", 3);
    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset);
    std::vector<std::uint8_t> data(first, first + 3 * static_cast<std::ptrdiff_t>(h.width) * h.height);
    return RgbImage(h.width, h.height, std::move(data));
}

Bytes write_ppm(const RgbImage& img) {
    Bytes out = header_bytes("P6", img.width(), img.height());
    out.insert(out.end(), img.bytes().begin(), img.bytes().end());
    return out;
}

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
    const Header h = parse_header(bytes, "P5", 1);
    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset);
    std::vector<std::uint8_t> data(first, first + static_cast<std::ptrdiff_t>(h.width) * h.height);
    return GrayImage(h.width, h.height, std::move(data));
}

Bytes write_pgm(const GrayImage& img) {
    Bytes out = header_bytes("P5", img.width(), img.height());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

Mask read_mask_pgm(std::span<const std::uint8_t> bytes) {
    GrayImage g = read_pgm(bytes);
    const std::size_t offset = bytes.size() - g.size();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.pixels()[i] != 0 && g.pixels()[i] != 255)
            throw FormatError("mask pixel value must be 0 or 255", offset + i);
    return Mask::from_gray(g);
}

Bytes write_mask_pgm(const Mask& m) { return write_pgm(m.gray()); }

Bytes read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("io", "cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    write_file(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RgbImage load_ppm(const std::filesystem::path& p) { return read_ppm(read_file(p)); }
GrayImage load_pgm(const std::filesystem::path& p) { return read_pgm(read_file(p)); }
Mask load_mask(const std::filesystem::path& p) { return read_mask_pgm(read_file(p)); }
void save_ppm(const std::filesystem::path& p, const RgbImage& img) { write_file(p, write_ppm(img)); }
void save_pgm(const std::filesystem::path& p, const GrayImage& img) { write_file(p, write_pgm(img)); }
void save_mask(const std::filesystem::path& p, const Mask& m) { write_file(p, write_mask_pgm(m)); }

}  // namespace bmc
