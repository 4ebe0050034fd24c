#include "sphsmooth/persistence.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr const char* kMagic = "sphsmooth-archive";

class Writer {
public:
    void line(const std::string& s) { out_ += s + '\n'; }
    void field(const std::string& key, double v) { line(key + ' ' + num(v)); }
    void field(const std::string& key, int v) { line(key + ' ' + std::to_string(v)); }
    void field(const std::string& key, const std::string& v) { line(key + ' ' + v); }
    void vector(const std::string& key, const Eigen::VectorXd& v) {
        line(key + ' ' + std::to_string(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) line(num(v(i)));
    }
    void matrix(const std::string& key, const Eigen::MatrixXd& M) {
        line(key + ' ' + std::to_string(M.rows()) + ' ' + std::to_string(M.cols()));
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            std::string row;
            for (Eigen::Index j = 0; j < M.cols(); ++j) row += (j ? " " : "") + num(M(i, j));
            line(row);
        }
    }
    void points(const std::vector<Direction>& pts) {
        line("points " + std::to_string(pts.size()));
        for (const auto& p : pts) line(num(p.theta) + ' ' + num(p.phi));
    }
    const std::string& str() const { return out_; }

    static std::string num(double v) {
        char buf[40];
        const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf, static_cast<std::size_t>(n));
    }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& body) : in_(body) {}

    std::vector<std::string> tokens() {
        std::string l;
        if (!std::getline(in_, l)) throw ArchiveError("corrupt archive: unexpected end of data");
        ++line_;
        std::vector<std::string> t;
        std::istringstream ls(l);
        for (std::string w; ls >> w;) t.push_back(w);
        return t;
    }
    std::vector<std::string> keyed(const std::string& key, std::size_t values) {
        auto t = tokens();
        if (t.empty() || t[0] != key || t.size() != values + 1)
            fail("expected '" + key + "' with " + std::to_string(values) + " value(s)");
        return t;
    }
    std::string text(const std::string& key) { return keyed(key, 1)[1]; }
    double real(const std::string& key) { return parse(keyed(key, 1)[1]); }
    int integer(const std::string& key) { return to_int(keyed(key, 1)[1]); }
    Eigen::VectorXd vector(const std::string& key) {
        const Eigen::Index n = to_int(keyed(key, 1)[1]);
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto t = tokens();
            if (t.size() != 1) fail("expected one number");
            v(i) = parse(t[0]);
        }
        return v;
    }
    Eigen::MatrixXd matrix(const std::string& key) {
        const auto h = keyed(key, 2);
        const Eigen::Index r = to_int(h[1]), c = to_int(h[2]);
        Eigen::MatrixXd M(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            const auto t = tokens();
            if (static_cast<Eigen::Index>(t.size()) != c) fail("matrix row has the wrong length");
            for (Eigen::Index j = 0; j < c; ++j) M(i, j) = parse(t[j]);
        }
        return M;
    }
    std::vector<Direction> points() {
        const int n = to_int(keyed("points", 1)[1]);
        std::vector<Direction> pts;
        pts.reserve(n);
        for (int i = 0; i < n; ++i) {
            const auto t = tokens();
            if (t.size() != 2) fail("point row needs theta and phi");
            pts.push_back(Direction{parse(t[0]), parse(t[1])});
        }
        return pts;
    }
    void end() {
        std::string rest;
        while (std::getline(in_, rest))
            if (!rest.empty()) fail("trailing content");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ArchiveError("corrupt archive at line " + std::to_string(line_ + 1) + ": " + what);
    }

private:
    double parse(const std::string& s) const {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    }
    int to_int(const std::string& s) const {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || v < 0) fail("bad count '" + s + "'");
        return v;
    }

    std::istringstream in_;
    int line_ = 0;
};

const char* weights_name(WeightScheme w) { return w == WeightScheme::Iota ? "IOTA" : "LAMBDA"; }
WeightScheme weights_from(const std::string& s) {
    if (s == "IOTA") return WeightScheme::Iota;
    if (s == "LAMBDA") return WeightScheme::Lambda;
    throw ArchiveError("unknown weight scheme '" + s + "'");
}
const char* branch_name(KernelBranch b) {
    switch (b) {
        case KernelBranch::Full: return "FULL";
        case KernelBranch::Zonal: return "ZONAL";
        case KernelBranch::GenericS: return "GENERIC_S";
    }
    return "?";
}
KernelBranch branch_from(const std::string& s) {
    if (s == "FULL") return KernelBranch::Full;
    if (s == "ZONAL") return KernelBranch::Zonal;
    if (s == "GENERIC_S") return KernelBranch::GenericS;
    throw ArchiveError("unknown kernel branch '" + s + "'");
}

void write_basis(Writer& w, const BasisSpec& b) {
    w.field("K", b.K);
    w.field("s", b.s);
    w.field("weights", weights_name(b.weights));
}
BasisSpec read_basis(Reader& r) {
    const int K = r.integer("K");
    const double s = r.real("s");
    return BasisSpec(K, s, weights_from(r.text("weights")));
}

void write_body(Writer& w, const SplineFit& f) {
    w.field("kind", "SPLINE");
    write_basis(w, f.spec());
    w.field("branch", branch_name(f.kernel().branch));
    w.field("series_tolerance", f.kernel().series_tolerance);
    w.field("xi", f.xi());
    w.points(f.points());
    w.vector("c", f.c());
    w.vector("d", f.d());
}
SplineFit read_spline(Reader& r) {
    const BasisSpec basis = read_basis(r);
    const KernelBranch branch = branch_from(r.text("branch"));
    const double tol = r.real("series_tolerance");
    const double xi = r.real("xi");
    auto pts = r.points();
    Eigen::VectorXd c = r.vector("c"), d = r.vector("d");
    if (c.size() != static_cast<Eigen::Index>(pts.size()) || d.size() != basis.size())
        throw ArchiveError("corrupt archive: coefficient lengths do not match");
    return SplineFit(KernelSpec(basis, branch, tol), std::move(pts), std::move(c), std::move(d), xi);
}

void write_body(Writer& w, const BayesFit& f) {
    w.field("kind", "BAYES");
    write_basis(w, f.spec);
    w.field("p", f.prior.p);
    w.field("b", f.prior.b);
    w.field("c_exp", f.prior.c_exp);
    w.field("series_tolerance", f.prior.series_tolerance);
    w.vector("beta0", f.prior.beta0);
    w.vector("beta1", f.prior.beta1);
    w.field("pstar", f.pstar);
    w.field("log_m0", f.log_m0);
    w.field("log_m1", f.log_m1);
    w.vector("gamma0", f.gamma0);
    w.vector("gamma1", f.gamma1);
    w.matrix("variance0", f.variance0);
    w.matrix("variance1", f.variance1);
    w.matrix("variance", f.variance);
}
BayesFit read_bayes(Reader& r) {
    BayesFit f;
    f.spec = read_basis(r);
    f.prior.p = r.real("p");
    f.prior.b = r.real("b");
    f.prior.c_exp = r.real("c_exp");
    f.prior.series_tolerance = r.real("series_tolerance");
    f.prior.beta0 = r.vector("beta0");
    f.prior.beta1 = r.vector("beta1");
    f.pstar = r.real("pstar");
    f.log_m0 = r.real("log_m0");
    f.log_m1 = r.real("log_m1");
    f.gamma0 = r.vector("gamma0");
    f.gamma1 = r.vector("gamma1");
    f.variance0 = r.matrix("variance0");
    f.variance1 = r.matrix("variance1");
    f.variance = r.matrix("variance");
    const Eigen::Index k = f.spec.size();
    if (f.gamma0.size() != k || f.gamma1.size() != k || f.prior.beta0.size() != k || f.prior.beta1.size() != k)
        throw ArchiveError("corrupt archive: coefficient lengths do not match");
    return f;
}

void write_body(Writer& w, const HistosplineFit& f) {
    w.field("kind", "HISTOSPLINE");
    w.field("m", f.m());
    w.field("K", f.K());
    w.field("xi", f.xi());
    w.field("series_degree", f.series_degree());
    w.field("roughness", f.roughness());
    w.vector("c", f.c_check());
    w.vector("d", f.d_check());
}
HistosplineFit read_histospline(Reader& r) {
    const int m = r.integer("m");
    const int K = r.integer("K");
    const double xi = r.real("xi");
    const int N = r.integer("series_degree");
    const double rough = r.real("roughness");
    Eigen::VectorXd c = r.vector("c"), d = r.vector("d");
    try {
        return HistosplineFit(K, m, xi, N, std::move(c), std::move(d), rough);
    } catch (const DomainError& e) {
        throw ArchiveError(std::string("corrupt archive: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read archive " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Splits off and verifies the digest line; returns the covered body.
std::string verified_body(const std::string& text, std::string* digest) {
    const std::string header = std::string(kMagic) + ' ';
    if (text.compare(0, header.size(), header) != 0) throw ArchiveError("not a sphsmooth archive");
    const auto eol = text.find('\n');
    if (eol == std::string::npos) throw ArchiveError("corrupt archive: truncated header");
    const std::string version = text.substr(header.size(), eol - header.size());
    if (version != std::to_string(kArchiveVersion))
        throw ArchiveError("unsupported archive schema version '" + version + "' (this build reads version " +
                           std::to_string(kArchiveVersion) + ")");
    const std::string tag = "digest sha256 ";
    const auto pos = text.rfind(tag);
    if (pos == std::string::npos || (pos > 0 && text[pos - 1] != '\n'))
        throw ArchiveError("corrupt archive: missing digest line (truncated file?)");
    std::string recorded = text.substr(pos + tag.size());
    while (!recorded.empty() && (recorded.back() == '\n' || recorded.back() == '\r')) recorded.pop_back();
    const std::string body = text.substr(0, pos);
    if (sha256_hex(body) != recorded) throw ArchiveError("corrupt archive: digest mismatch");
    if (digest) *digest = recorded;
    return body.substr(eol + 1);
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string serialize(const AnyFit& fit) {
    Writer w;
    w.line(std::string(kMagic) + ' ' + std::to_string(kArchiveVersion));
    std::visit([&](const auto& f) { write_body(w, f); }, fit);
    const std::string body = w.str();
    return body + "digest sha256 " + sha256_hex(body) + '\n';
}

AnyFit deserialize(const std::string& text) {
    Reader r(verified_body(text, nullptr));
    const std::string kind = r.text("kind");
    AnyFit out;
    try {
        if (kind == "SPLINE")
            out = read_spline(r);
        else if (kind == "BAYES")
            out = read_bayes(r);
        else if (kind == "HISTOSPLINE")
            out = read_histospline(r);
        else
            throw ArchiveError("unknown fit kind '" + kind + "'");
    } catch (const ArchiveError&) {
        throw;
    } catch (const InputError& e) {
        throw ArchiveError(std::string("corrupt archive: ") + e.what());
    }
    r.end();
    return out;
}

std::string save(const AnyFit& fit, const std::filesystem::path& path) {
    const std::string text = serialize(fit);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write archive " + path.string());
    out << text;
    out.close();
    if (!out) throw InputError("write failed for " + path.string());
    std::string digest;
    verified_body(text, &digest);
    return digest;
}

AnyFit load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

std::string archive_digest(const std::filesystem::path& path) {
    std::string digest;
    verified_body(read_file(path), &digest);
    return digest;
}

double evaluate(const AnyFit& fit, const Direction& x) {
    return std::visit([&](const auto& f) { return f.evaluate(x); }, fit);
}

const char* fit_kind_name(const AnyFit& fit) {
    switch (fit.index()) {
        case 0: return "SPLINE";
        case 1: return "BAYES";
        default: return "HISTOSPLINE";
    }
}

}  // namespace sphsmooth
