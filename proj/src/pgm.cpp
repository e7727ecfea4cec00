#include "kpbms/pgm.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace kpbms {

namespace {

struct PgmHeader {
    bool binary = true;
    int width = 0;
    int height = 0;
    int maxval = 255;
};

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

PgmHeader read_header(std::istream& in, const std::filesystem::path& path) {
    PgmHeader h;
    const std::string magic = next_token(in);
    if (magic == "P5")
        h.binary = true;
    else if (magic == "P2")
        h.binary = false;
    else
        throw std::runtime_error(path.string() + ": not a PGM file");
    try {
        h.width = std::stoi(next_token(in));
        h.height = std::stoi(next_token(in));
        h.maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": malformed PGM header");
    }
    if (h.width < 1 || h.height < 1 || h.maxval < 1 || h.maxval > 65535)
        throw std::runtime_error(path.string() + ": invalid PGM dimensions or maxval");
    return h;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const PgmHeader h = read_header(in, path);
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    std::vector<double> data(n);
    const double maxval = h.maxval;
    if (h.binary) {
        // Single whitespace byte separates the header from raster data;
        // read_header already consumed it.
        const int bytes = h.maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(n * bytes);
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw std::runtime_error(path.string() + ": truncated PGM raster");
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned value = bytes == 1
                                       ? raw[i]
                                       : (static_cast<unsigned>(raw[2 * i]) << 8) |
                                             raw[2 * i + 1];
            if (value > static_cast<unsigned>(h.maxval))
                throw std::runtime_error(path.string() + ": sample above maxval");
            data[i] = value / maxval;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            int value;
            if (!(in >> value) || value < 0 || value > h.maxval)
                throw std::runtime_error(path.string() + ": malformed PGM sample");
            data[i] = value / maxval;
        }
    }
    return GrayImage::from_data(h.width, h.height, std::move(data));
}

std::pair<int, int> read_pgm_dims(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const PgmHeader h = read_header(in, path);
    if (h.binary) {
        // Cheap decodability check: the raster must be fully present.
        const std::streamoff start = in.tellg();
        in.seekg(0, std::ios::end);
        const std::streamoff available = in.tellg() - start;
        const std::streamoff expected = static_cast<std::streamoff>(h.width) *
                                        h.height * (h.maxval > 255 ? 2 : 1);
        if (available < expected)
            throw std::runtime_error(path.string() + ": truncated PGM raster");
    }
    return {h.width, h.height};
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path,
               int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("PGM bit depth must be 8 or 16");
    const int maxval = bit_depth == 8 ? 255 : 65535;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
    for (double v : image.data()) {
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        if (bit_depth == 16) out.put(static_cast<char>((q >> 8) & 0xFF));
        out.put(static_cast<char>(q & 0xFF));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace kpbms
