#include "gmedia/pgm.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <string>

#include "gmedia/errors.hpp"

namespace gmedia {
namespace {

struct Token {
    std::string text;
    int line = 0;
};

class Tokenizer {
public:
    explicit Tokenizer(std::istream& in) : in_(in) {}

    bool next(Token& token) {
        token.text.clear();
        int c = in_.get();
        for (;;) {
            if (c == EOF) {
                return false;
            }
            if (c == '#') {
                while (c != EOF && c != '\n') {
                    c = in_.get();
                }
                continue;
            }
            if (c == '\n') {
                ++line_;
                c = in_.get();
                continue;
            }
            if (std::isspace(c)) {
                c = in_.get();
                continue;
            }
            break;
        }
        token.line = line_;
        while (c != EOF && !std::isspace(c) && c != '#') {
            token.text.push_back(static_cast<char>(c));
            c = in_.get();
        }
        if (c != EOF) {
            in_.unget();
        }
        return true;
    }

    int line() const { return line_; }

private:
    std::istream& in_;
    int line_ = 1;
};

int parse_int(const Token& token, const char* what) {
    if (token.text.empty()) {
        throw ParseError(std::string("missing ") + what, token.line);
    }
    for (char ch : token.text) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            throw ParseError(std::string("expected integer ") + what + ", got '" + token.text + "'", token.line);
        }
    }
    try {
        return std::stoi(token.text);
    } catch (const std::out_of_range&) {
        throw ParseError(std::string(what) + " out of range", token.line);
    }
}

}  // namespace

Raster read_pgm(std::istream& in) {
    Tokenizer tok(in);
    Token token;
    if (!tok.next(token)) {
        throw ParseError("empty PGM input", tok.line());
    }
    if (token.text != "P2") {
        throw ParseError("expected PGM magic 'P2', got '" + token.text + "'", token.line);
    }
    Raster raster;
    const char* header_fields[] = {"width", "height", "max value"};
    int header[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        if (!tok.next(token)) {
            throw ParseError(std::string("missing ") + header_fields[i], tok.line());
        }
        header[i] = parse_int(token, header_fields[i]);
    }
    raster.width = header[0];
    raster.height = header[1];
    raster.max_value = header[2];
    if (raster.width <= 0 || raster.height <= 0) {
        throw ParseError("raster dimensions must be positive", token.line);
    }
    if (raster.max_value <= 0 || raster.max_value > 65535) {
        throw ParseError("max value must be in [1, 65535]", token.line);
    }
    const std::size_t count = static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height);
    raster.pixels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!tok.next(token)) {
            throw ParseError("expected " + std::to_string(count) + " pixels, found " + std::to_string(i),
                             tok.line());
        }
        const int value = parse_int(token, "pixel");
        if (value > raster.max_value) {
            throw ParseError("pixel value " + std::to_string(value) + " exceeds max value", token.line);
        }
        raster.pixels.push_back(value);
    }
    if (tok.next(token)) {
        throw ParseError("trailing data '" + token.text + "'", token.line);
    }
    return raster;
}

void write_pgm(std::ostream& out, const Raster& raster) {
    out << "P2\n" << raster.width << ' ' << raster.height << '\n' << raster.max_value << '\n';
    for (int r = 0; r < raster.height; ++r) {
        for (int c = 0; c < raster.width; ++c) {
            out << raster.at(r, c) << (c + 1 == raster.width ? '\n' : ' ');
        }
    }
}

}  // namespace gmedia
