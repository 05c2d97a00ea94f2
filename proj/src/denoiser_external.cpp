#include "pnp/external.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pnp/errors.hpp"

namespace pnp {

namespace wire {

namespace {

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

std::uint32_t u32_at(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

double f64_at(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

std::vector<std::uint8_t> encode_request(std::uint32_t height, std::uint32_t width,
                                         double eps, std::span<const double> pixels) {
    if (pixels.size() != static_cast<std::size_t>(height) * width)
        throw DimensionError("encode_request: pixel count does not match shape");
    std::vector<std::uint8_t> buf;
    buf.reserve(4 + 1 + 4 + 4 + 8 + pixels.size() * 8);
    buf.insert(buf.end(), {'P', 'N', 'P', 'D'});
    buf.push_back(kVersion);
    put_u32(buf, height);
    put_u32(buf, width);
    put_f64(buf, eps);
    for (double v : pixels) put_f64(buf, v);
    return buf;
}

std::vector<std::uint8_t> encode_response(std::uint8_t status,
                                          std::span<const double> pixels) {
    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), {'P', 'N', 'P', 'R'});
    buf.push_back(status);
    if (status == 0)
        for (double v : pixels) put_f64(buf, v);
    return buf;
}

std::optional<Request> read_request(std::istream& in) {
    std::uint8_t head[4 + 1 + 4 + 4 + 8];
    in.read(reinterpret_cast<char*>(head), 1);
    if (in.gcount() == 0) return std::nullopt; // clean EOF between messages
    in.read(reinterpret_cast<char*>(head) + 1, sizeof(head) - 1);
    if (in.gcount() != static_cast<std::streamsize>(sizeof(head) - 1))
        throw TransportError("denoiser request truncated in header");
    if (std::memcmp(head, "PNPD", 4) != 0)
        throw TransportError("denoiser request has bad magic");
    if (head[4] != kVersion)
        throw TransportError("denoiser request has unsupported version " +
                             std::to_string(head[4]));
    Request req;
    req.height = u32_at(head + 5);
    req.width = u32_at(head + 9);
    req.eps = f64_at(head + 13);
    const std::size_t n = static_cast<std::size_t>(req.height) * req.width;
    req.pixels.resize(n);
    std::vector<std::uint8_t> body(n * 8);
    in.read(reinterpret_cast<char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
    if (in.gcount() != static_cast<std::streamsize>(body.size()))
        throw TransportError("denoiser request truncated in payload");
    for (std::size_t i = 0; i < n; ++i) req.pixels[i] = f64_at(body.data() + i * 8);
    return req;
}

void write_response(std::ostream& out, std::uint8_t status,
                    std::span<const double> pixels) {
    const auto buf = encode_response(status, pixels);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    out.flush();
}

} // namespace wire

void serve_denoiser(std::istream& in, std::ostream& out, const DenoiseHandler& handler) {
    while (auto req = wire::read_request(in)) {
        std::vector<double> result;
        const std::uint8_t status = handler(*req, result);
        if (status == 0 && result.size() != req->pixels.size())
            throw TransportError("denoiser handler returned wrong pixel count");
        wire::write_response(out, status, result);
    }
}

// ---------------------------------------------------------------------------
// Subprocess client
// ---------------------------------------------------------------------------

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::write(fd, data, n);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("denoiser endpoint write failed: ") +
                                 std::strerror(errno));
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

void read_all(int fd, std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t r = ::read(fd, data, n);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("denoiser endpoint read failed: ") +
                                 std::strerror(errno));
        }
        if (r == 0) throw TransportError("denoiser endpoint closed mid-response");
        data += r;
        n -= static_cast<std::size_t>(r);
    }
}

} // namespace

ExternalDenoiser::ExternalDenoiser(std::vector<std::string> argv, double declared_l)
    : argv_(std::move(argv)), declared_l_(declared_l) {
    if (argv_.empty()) throw ConfigError("external denoiser needs a command");
    if (!(declared_l_ >= 0.0))
        throw ConfigError("external denoiser requires a declared residual-Lipschitz bound");
    spawn();
}

ExternalDenoiser::~ExternalDenoiser() { shutdown(); }

void ExternalDenoiser::set_shape(std::uint32_t height, std::uint32_t width) {
    height_ = height;
    width_ = width;
}

void ExternalDenoiser::spawn() {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw TransportError("cannot create pipes for denoiser endpoint");
    const int pid = ::fork();
    if (pid < 0) throw TransportError("cannot fork denoiser endpoint");
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> cargv;
        cargv.reserve(argv_.size() + 1);
        for (auto& a : argv_) cargv.push_back(a.data());
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
}

void ExternalDenoiser::shutdown() noexcept {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        // Closing stdin asks a well-behaved server to exit; give it a moment,
        // then stop waiting politely.
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            ::usleep(5000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void ExternalDenoiser::denoise(std::span<const double> x, double eps,
                               std::span<double> out) const {
    if (x.size() != out.size()) throw DimensionError("denoise: size mismatch");
    std::uint32_t h = height_, w = width_;
    if (static_cast<std::size_t>(h) * w != x.size()) {
        h = 1;
        w = static_cast<std::uint32_t>(x.size());
    }
    const auto buf = wire::encode_request(h, w, eps, x);
    write_all(to_child_, buf.data(), buf.size());

    std::uint8_t head[5];
    read_all(from_child_, head, sizeof(head));
    if (std::memcmp(head, "PNPR", 4) != 0)
        throw TransportError("denoiser endpoint replied with bad magic");
    if (head[4] != 0)
        throw TransportError("denoiser endpoint reported failure status " +
                             std::to_string(head[4]));
    std::vector<std::uint8_t> body(x.size() * 8);
    read_all(from_child_, body.data(), body.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(body[i * 8 + b]) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
}

std::string ExternalDenoiser::describe() const {
    std::ostringstream os;
    os << "external(" << argv_[0] << ", L=" << declared_l_ << ")";
    return os.str();
}

} // namespace pnp
