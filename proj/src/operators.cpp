#include "scarlab/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>

namespace scarlab {

namespace {

constexpr Complex kI{0.0, 1.0};

double ladder_up_amp(int spin, int m) {
    // <m+1| s^+ |m> for spin j
    const double j = spin;
    return std::sqrt(j * (j + 1.0) - static_cast<double>(m) * (m + 1.0));
}

}  // namespace

Eigen::MatrixXcd single_site_spin(SpinAxis axis, int spin) {
    if (spin < 1) throw std::invalid_argument("single_site_spin: spin size must be >= 1");
    const int q = 2 * spin + 1;
    Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(q, q);
    for (int lv = 0; lv + 1 < q; ++lv) sp(lv + 1, lv) = ladder_up_amp(spin, lv - spin);
    switch (axis) {
        case SpinAxis::X: return (sp + sp.adjoint()) / 2.0;
        case SpinAxis::Y: return (sp - sp.adjoint()) / (2.0 * kI);
        case SpinAxis::Z: {
            Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(q, q);
            for (int lv = 0; lv < q; ++lv) sz(lv, lv) = lv - spin;
            return sz;
        }
    }
    throw std::logic_error("single_site_spin: bad axis");
}

SparseOperator SparseOperator::from_triplets(std::size_t dim, std::vector<Entry> triplets,
                                             bool hermitian) {
    for (const auto& e : triplets)
        if (e.row >= dim || e.col >= dim)
            throw std::invalid_argument("SparseOperator: entry index out of range");
    std::sort(triplets.begin(), triplets.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseOperator op;
    op.dim = dim;
    op.hermitian = hermitian;
    op.entries.reserve(triplets.size());
    for (const auto& e : triplets) {
        if (!op.entries.empty() && op.entries.back().row == e.row && op.entries.back().col == e.col)
            op.entries.back().value += e.value;
        else
            op.entries.push_back(e);
    }
    std::erase_if(op.entries, [](const Entry& e) { return e.value == Complex{}; });
    if (hermitian) {
        auto find = [&](std::uint32_t r, std::uint32_t c) -> const Entry* {
            auto it = std::lower_bound(op.entries.begin(), op.entries.end(), std::make_pair(r, c),
                                       [](const Entry& e, const std::pair<std::uint32_t, std::uint32_t>& k) {
                                           return e.row != k.first ? e.row < k.first : e.col < k.second;
                                       });
            if (it == op.entries.end() || it->row != r || it->col != c) return nullptr;
            return &*it;
        };
        for (const auto& e : op.entries) {
            const Entry* t = find(e.col, e.row);
            if (t == nullptr || std::abs(t->value - std::conj(e.value)) > 1e-12)
                throw std::invalid_argument("SparseOperator: hermitian flag set on non-Hermitian entries");
        }
    }
    return op;
}

Eigen::VectorXcd SparseOperator::apply(const Eigen::VectorXcd& x) const {
    if (static_cast<std::size_t>(x.size()) != dim)
        throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (const auto& e : entries) out[e.row] += e.value * x[e.col];
    return out;
}

Eigen::MatrixXcd SparseOperator::dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& e : entries) m(e.row, e.col) += e.value;
    return m;
}

Eigen::SparseMatrix<Complex> SparseOperator::to_eigen() const {
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(entries.size());
    for (const auto& e : entries) trip.emplace_back(e.row, e.col, e.value);
    Eigen::SparseMatrix<Complex> m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

double SparseOperator::frobenius_norm() const {
    double s = 0;
    for (const auto& e : entries) s += std::norm(e.value);
    return std::sqrt(s);
}

SparseOperator SparseOperator::adjoint() const {
    std::vector<Entry> t;
    t.reserve(entries.size());
    for (const auto& e : entries) t.push_back({e.col, e.row, std::conj(e.value)});
    return from_triplets(dim, std::move(t), hermitian);
}

SparseOperator SparseOperator::scaled(Complex factor) const {
    std::vector<Entry> t = entries;
    for (auto& e : t) e.value *= factor;
    const bool herm = hermitian && factor.imag() == 0.0;
    return from_triplets(dim, std::move(t), herm);
}

SparseOperator SparseOperator::sum(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim != b.dim) throw std::invalid_argument("SparseOperator::sum: dimension mismatch");
    std::vector<Entry> t = a.entries;
    t.insert(t.end(), b.entries.begin(), b.entries.end());
    return from_triplets(a.dim, std::move(t), a.hermitian && b.hermitian);
}

SparseOperator build_spin_operator(SpinAxis axis, int site, const ConstrainedBasis& basis) {
    const int D = basis.chain_length();
    if (site < 0 || site >= D) throw std::invalid_argument("build_spin_operator: site out of range");
    const int spin = basis.spin();
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        ProductState ps = basis.state(s);
        const int m = ps.m(site, spin);
        if (axis == SpinAxis::Z) {
            trip.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s),
                            Complex(static_cast<double>(m), 0)});
            continue;
        }
        // s^x = (s+ + s-)/2, s^y = (s+ - s-)/(2i)
        if (m < spin) {
            ProductState up = ps;
            ++up.levels[site];
            if (auto t = basis.index_of(up)) {
                const double amp = ladder_up_amp(spin, m) / 2.0;
                const Complex v = axis == SpinAxis::X ? Complex(amp, 0) : Complex(0, -amp);
                trip.push_back({static_cast<std::uint32_t>(*t), static_cast<std::uint32_t>(s), v});
            }
        }
        if (m > -spin) {
            ProductState down = ps;
            --down.levels[site];
            if (auto t = basis.index_of(down)) {
                const double amp = ladder_up_amp(spin, m - 1) / 2.0;
                const Complex v = axis == SpinAxis::X ? Complex(amp, 0) : Complex(0, amp);
                trip.push_back({static_cast<std::uint32_t>(*t), static_cast<std::uint32_t>(s), v});
            }
        }
    }
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
}

SparseOperator build_hamiltonian(const ConstrainedBasis& basis) {
    SparseOperator h;
    h.dim = basis.dim();
    h.hermitian = true;
    std::vector<SparseOperator::Entry> trip;
    for (int k = 0; k < basis.chain_length(); ++k) {
        SparseOperator sk = build_spin_operator(SpinAxis::X, k, basis);
        trip.insert(trip.end(), sk.entries.begin(), sk.entries.end());
    }
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
}

SparseOperator build_number_operator(const ConstrainedBasis& basis) {
    const int D = basis.chain_length();
    const int q = basis.local_dim();
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        ProductState ps = basis.state(s);
        for (int k = 0; k < D; ++k) {
            const int left = ps.levels[k];
            const int right = ps.levels[(k + 1) % D];
            const bool pat_a = (left == q - 2 && right == 0);      // |j-1,-j>
            const bool pat_b = (left == q - 1 && right == 1);      // |j,-j+1>
            if (!pat_a && !pat_b) continue;
            trip.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s), Complex(0.5, 0)});
            ProductState other = ps;
            other.levels[k] = static_cast<std::int8_t>(pat_a ? q - 1 : q - 2);
            other.levels[(k + 1) % D] = static_cast<std::int8_t>(pat_a ? 1 : 0);
            if (auto t = basis.index_of(other))
                trip.push_back({static_cast<std::uint32_t>(*t), static_cast<std::uint32_t>(s),
                                Complex(0.5, 0)});
        }
    }
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
}

namespace {

// Observable mini-language parser: expr := term (('+'|'-') term)*,
// term := factor ('*' factor)*, factor := number | name '(' ints ')'.
struct ObsTerm {
    Complex coeff{1.0, 0.0};
    std::vector<std::pair<int, Eigen::MatrixXcd>> factors;  // (site, matrix), combined per site
};

class ObsParser {
public:
    ObsParser(const std::string& text, int chain_length, int spin)
        : text_(text), chain_length_(chain_length), spin_(spin) {}

    std::vector<ObsTerm> parse() {
        std::vector<ObsTerm> terms;
        skip_ws();
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = (get() == '-') ? -1.0 : 1.0;
        terms.push_back(parse_term(sign));
        skip_ws();
        while (pos_ < text_.size()) {
            const char op = get();
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            terms.push_back(parse_term(op == '-' ? -1.0 : 1.0));
            skip_ws();
        }
        return terms;
    }

private:
    ObsTerm parse_term(double sign) {
        ObsTerm term;
        term.coeff = sign;
        while (true) {
            skip_ws();
            if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
                std::size_t used = 0;
                term.coeff *= std::stod(text_.substr(pos_), &used);
                pos_ += used;
            } else {
                apply_factor(term);
            }
            skip_ws();
            if (peek() == '*') {
                get();
                continue;
            }
            break;
        }
        return term;
    }

    void apply_factor(ObsTerm& term) {
        std::string name;
        while (std::isalpha(static_cast<unsigned char>(peek()))) name.push_back(get());
        if (name.empty()) fail("expected factor name");
        expect('(');
        std::vector<int> args;
        args.push_back(parse_int());
        skip_ws();
        while (peek() == ',') {
            get();
            args.push_back(parse_int());
            skip_ws();
        }
        expect(')');

        Eigen::MatrixXcd m;
        int site_arg = 0;
        const int q = 2 * spin_ + 1;
        if (name == "sx" || name == "sy" || name == "sz") {
            if (args.size() != 1) fail(name + " takes one site argument");
            site_arg = args[0];
            m = single_site_spin(name == "sx"   ? SpinAxis::X
                                 : name == "sy" ? SpinAxis::Y
                                                : SpinAxis::Z,
                                 spin_);
        } else if (name == "proj") {
            if (args.size() != 2) fail("proj takes (site, m)");
            site_arg = args[0];
            const int lv = args[1] + spin_;
            if (lv < 0 || lv >= q) fail("proj: |m| > j");
            m = Eigen::MatrixXcd::Zero(q, q);
            m(lv, lv) = 1.0;
        } else if (name == "id") {
            if (args.size() != 1) fail("id takes one site argument");
            site_arg = args[0];
            m = Eigen::MatrixXcd::Identity(q, q);
        } else {
            fail("unknown factor '" + name + "'");
        }
        if (site_arg < 1 || site_arg > chain_length_) fail("site index out of range (sites are 1-based)");
        const int site = site_arg - 1;
        for (auto& [s, existing] : term.factors) {
            if (s == site) {
                existing = existing * m;  // left-to-right product on one site
                return;
            }
        }
        term.factors.emplace_back(site, std::move(m));
    }

    int parse_int() {
        skip_ws();
        std::size_t used = 0;
        int v = std::stoi(text_.substr(pos_), &used);
        if (used == 0) fail("expected integer");
        pos_ += used;
        return v;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char get() { return text_[pos_++]; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("observable spec '" + text_ + "': " + why);
    }

    std::string text_;
    std::size_t pos_ = 0;
    int chain_length_;
    int spin_;
};

}  // namespace

SparseOperator build_local_observable(const std::string& spec, const ConstrainedBasis& basis) {
    const auto terms = ObsParser(spec, basis.chain_length(), basis.spin()).parse();
    std::vector<SparseOperator::Entry> trip;
    const int q = basis.local_dim();
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        ProductState ps = basis.state(s);
        for (const auto& term : terms) {
            // Expand the product of single-site columns over all target combinations.
            std::vector<std::pair<ProductState, Complex>> frontier{{ps, term.coeff}};
            for (const auto& [site, m] : term.factors) {
                std::vector<std::pair<ProductState, Complex>> next;
                for (const auto& [st, amp] : frontier) {
                    const int from = st.levels[site];
                    for (int to = 0; to < q; ++to) {
                        const Complex v = m(to, from);
                        if (v == Complex{}) continue;
                        ProductState ns = st;
                        ns.levels[site] = static_cast<std::int8_t>(to);
                        next.emplace_back(std::move(ns), amp * v);
                    }
                }
                frontier.swap(next);
            }
            for (const auto& [st, amp] : frontier) {
                if (auto t = basis.index_of(st))
                    trip.push_back({static_cast<std::uint32_t>(*t), static_cast<std::uint32_t>(s), amp});
            }
        }
    }
    auto op = SparseOperator::from_triplets(basis.dim(), std::move(trip), false);
    // Contract: observables are Hermitian.
    auto adj = op.adjoint();
    if (op.entries.size() != adj.entries.size())
        throw std::invalid_argument("observable spec '" + spec + "' is not Hermitian");
    for (std::size_t i = 0; i < op.entries.size(); ++i) {
        const auto& a = op.entries[i];
        const auto& b = adj.entries[i];
        if (a.row != b.row || a.col != b.col || std::abs(a.value - b.value) > 1e-12)
            throw std::invalid_argument("observable spec '" + spec + "' is not Hermitian");
    }
    op.hermitian = true;
    return op;
}

SgaOperators build_sga_operators(const ConstrainedBasis& basis) {
    const int D = basis.chain_length();
    const int q = basis.local_dim();
    const int spin = basis.spin();
    const std::size_t dim = basis.dim();

    SgaOperators out;

    std::vector<int> total_m(dim);
    {
        std::vector<SparseOperator::Entry> trip;
        for (std::size_t s = 0; s < dim; ++s) {
            ProductState ps = basis.state(s);
            int m = 0;
            for (int k = 0; k < D; ++k) m += ps.m(k, spin);
            total_m[s] = m;
            if (m != 0)
                trip.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s),
                                Complex(static_cast<double>(m), 0)});
        }
        out.qz = SparseOperator::from_triplets(dim, std::move(trip), true);
    }

    // Qy = exp(-i pi/2 Qz) H exp(+i pi/2 Qz): phase i^(M(col) - M(row)) on each entry.
    {
        SparseOperator h = build_hamiltonian(basis);
        std::vector<SparseOperator::Entry> trip = h.entries;
        static const Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (auto& e : trip) {
            const int d = ((total_m[e.col] - total_m[e.row]) % 4 + 4) % 4;
            e.value *= kPhases[d];
        }
        out.qy = SparseOperator::from_triplets(dim, std::move(trip), true);
    }

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    out.qplus = SparseOperator::sum(out.qy.scaled(inv_sqrt2), out.qz.scaled(kI * inv_sqrt2));
    out.qminus = SparseOperator::sum(out.qy.scaled(inv_sqrt2), out.qz.scaled(-kI * inv_sqrt2));
    out.qplus.hermitian = out.qminus.hermitian = false;

    out.rk.reserve(D);
    for (int k = 0; k < D; ++k) {
        std::vector<SparseOperator::Entry> trip;
        for (std::size_t s = 0; s < dim; ++s) {
            ProductState ps = basis.state(s);
            const int left = ps.levels[k];
            const int right = ps.levels[(k + 1) % D];
            double v = 0;
            if (left == q - 2 && right == 0) v = +1;       // |j-1,-j><j-1,-j|
            else if (left == q - 1 && right == 1) v = -1;  // -|j,-j+1><j,-j+1|
            if (v != 0)
                trip.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s), Complex(v, 0)});
        }
        out.rk.push_back(SparseOperator::from_triplets(dim, std::move(trip), true));
    }
    {
        std::vector<SparseOperator::Entry> trip;
        for (const auto& rk : out.rk)
            for (const auto& e : rk.entries)
                trip.push_back({e.row, e.col, e.value * kI * (static_cast<double>(spin) * inv_sqrt2)});
        out.rhat = SparseOperator::from_triplets(dim, std::move(trip), false);
    }
    return out;
}

SparseOperator build_translation(const ConstrainedBasis& basis) {
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s)
        trip.push_back({static_cast<std::uint32_t>(basis.translated_index(s, 1)),
                        static_cast<std::uint32_t>(s), Complex(1, 0)});
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), false);
}

SparseOperator build_spin_flip_inversion(const ConstrainedBasis& basis) {
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s)
        trip.push_back({static_cast<std::uint32_t>(basis.spin_flip_inverted_index(s)),
                        static_cast<std::uint32_t>(s), Complex(1, 0)});
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), true);
}

SectorOperator project_to_sector(const SparseOperator& op, const SymmetrySector& sector,
                                 bool warn_if_noncommuting) {
    if (op.dim != sector.full_dim())
        throw std::invalid_argument("project_to_sector: operator/sector dimension mismatch");

    if (warn_if_noncommuting) {
        // Spot-check [op, T] = 0 on a few basis columns: op(T e_s) vs T(op e_s).
        bool commutes = true;
        const std::size_t dim = op.dim;
        const std::size_t step = std::max<std::size_t>(1, dim / 7);
        for (std::size_t s = 0; s < dim && commutes; s += step) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
            e[s] = 1.0;
            Eigen::VectorXcd oe = op.apply(e);
            Eigen::VectorXcd toe = Eigen::VectorXcd::Zero(dim);
            for (std::size_t r = 0; r < dim; ++r)
                if (oe[r] != Complex{}) toe[sector.translated_state(r)] += oe[r];
            Eigen::VectorXcd et = Eigen::VectorXcd::Zero(dim);
            et[sector.translated_state(s)] = 1.0;
            Eigen::VectorXcd ote = op.apply(et);
            if ((toe - ote).norm() > 1e-10 * (1.0 + ote.norm())) commutes = false;
        }
        if (!commutes)
            std::cerr << "[scarlab] note: projecting an operator that does not commute with "
                         "translation onto the momentum-zero sector\n";
    }

    // Column-sorted copy so sparse sector vectors touch only live columns.
    std::vector<SparseOperator::Entry> by_col = op.entries;
    std::sort(by_col.begin(), by_col.end(), [](const auto& a, const auto& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    std::vector<std::size_t> col_start(op.dim + 1, 0);
    for (const auto& e : by_col) ++col_start[e.col + 1];
    for (std::size_t c = 0; c < op.dim; ++c) col_start[c + 1] += col_start[c];

    const std::size_t n = sector.dim();
    Eigen::MatrixXcd m(n, n);
    Eigen::VectorXcd work = Eigen::VectorXcd::Zero(op.dim);
    std::vector<std::uint32_t> touched;
    for (std::size_t p = 0; p < n; ++p) {
        const auto& bv = sector.vec(p);
        for (std::size_t i = 0; i < bv.states.size(); ++i) {
            const std::uint32_t c = bv.states[i];
            for (std::size_t e = col_start[c]; e < col_start[c + 1]; ++e) {
                if (work[by_col[e].row] == Complex{}) touched.push_back(by_col[e].row);
                work[by_col[e].row] += by_col[e].value * bv.coeff[i];
            }
        }
        m.col(p) = sector.project(work);
        for (std::uint32_t r : touched) work[r] = Complex{};
        touched.clear();
    }
    if (op.hermitian) m = ((m + m.adjoint()) / 2.0).eval();

    SectorOperator out;
    out.mat = std::move(m);
    out.parity_resolved = sector.parity_resolved();
    out.dim_even = sector.parity_resolved() ? sector.dim_even() : 0;
    out.dim_odd = sector.parity_resolved() ? sector.dim_odd() : 0;
    return out;
}

FullProductBasis::FullProductBasis(int chain_length, int spin, std::size_t dim_cap)
    : chain_length_(chain_length), spin_(spin) {
    if (chain_length < 2 || spin < 1) throw std::invalid_argument("FullProductBasis: bad geometry");
    const int q = 2 * spin + 1;
    double d = std::pow(static_cast<double>(q), chain_length);
    if (d > static_cast<double>(dim_cap))
        throw std::runtime_error("FullProductBasis: full-space dimension exceeds cap");
    dim_ = 1;
    place_.assign(chain_length, 1);
    for (int k = chain_length - 1; k >= 0; --k) {
        place_[k] = dim_;
        dim_ *= q;
    }
}

int FullProductBasis::level(std::size_t state, int site) const {
    return static_cast<int>((state / place_[site]) % local_dim());
}

std::size_t FullProductBasis::with_level(std::size_t state, int site, int new_level) const {
    const std::ptrdiff_t delta = new_level - level(state, site);
    return state + delta * static_cast<std::ptrdiff_t>(place_[site]);
}

std::size_t FullProductBasis::with_bond(std::size_t state, int bond, int lv_left, int lv_right) const {
    const int right_site = (bond + 1) % chain_length_;
    std::size_t out = state;
    out += (lv_left - level(state, bond)) * static_cast<std::ptrdiff_t>(place_[bond]);
    out += (lv_right - level(state, right_site)) * static_cast<std::ptrdiff_t>(place_[right_site]);
    return out;
}

bool FullProductBasis::blockade_free(std::size_t state) const {
    const int q = local_dim();
    for (int k = 0; k < chain_length_; ++k)
        if (level(state, k) == q - 1 && level(state, (k + 1) % chain_length_) == 0) return false;
    return true;
}

namespace {

// M_k = |x><y| on bond k (tensored with identity elsewhere), as triplets.
std::vector<SparseOperator::Entry> mk_triplets(const FullProductBasis& basis, int bond) {
    const int q = basis.local_dim();
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        const int left = basis.level(s, bond);
        const int right = basis.level(s, (bond + 1) % basis.chain_length());
        const bool pat_a = (left == q - 2 && right == 0);
        const bool pat_b = (left == q - 1 && right == 1);
        if (!pat_a && !pat_b) continue;
        const std::size_t t = basis.with_bond(s, bond, q - 1, 0);
        trip.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(s), Complex(a, 0)});
    }
    return trip;
}

std::vector<SparseOperator::Entry> pi_triplets(const FullProductBasis& basis, int bond) {
    const int q = basis.local_dim();
    std::vector<SparseOperator::Entry> trip;
    for (std::size_t s = 0; s < basis.dim(); ++s)
        if (basis.level(s, bond) == q - 1 && basis.level(s, (bond + 1) % basis.chain_length()) == 0)
            trip.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s), Complex(1, 0)});
    return trip;
}

}  // namespace

SparseOperator build_nonhermitian_hamiltonian(double c, const FullProductBasis& basis) {
    if (!(c > 0)) throw std::invalid_argument("build_nonhermitian_hamiltonian: c must be positive");
    const int D = basis.chain_length();
    const int spin = basis.spin();
    const int q = basis.local_dim();
    const double sqrt_j = std::sqrt(static_cast<double>(spin));

    std::vector<SparseOperator::Entry> trip;
    // free part: sum_k s_k^x
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        for (int k = 0; k < D; ++k) {
            const int lv = basis.level(s, k);
            const int m = lv - spin;
            if (lv + 1 < q) {
                const std::size_t t = basis.with_level(s, k, lv + 1);
                trip.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(s),
                                Complex(ladder_up_amp(spin, m) / 2.0, 0)});
            }
            if (lv > 0) {
                const std::size_t t = basis.with_level(s, k, lv - 1);
                trip.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(s),
                                Complex(ladder_up_amp(spin, m - 1) / 2.0, 0)});
            }
        }
    }
    for (int k = 0; k < D; ++k) {
        for (const auto& e : mk_triplets(basis, k)) {
            trip.push_back({e.row, e.col, -sqrt_j * e.value});                     // -sqrt(j) M_k
            trip.push_back({e.col, e.row, sqrt_j * std::conj(e.value)});           // +sqrt(j) M_k^dag
        }
        for (const auto& e : pi_triplets(basis, k))
            trip.push_back({e.row, e.col, -kI * c * std::sqrt(spin / 2.0) * e.value});
    }
    return SparseOperator::from_triplets(basis.dim(), std::move(trip), false);
}

OpenSystemOps OpenSystemOps::build(int chain_length, int spin, double c, std::size_t dim_cap) {
    if (!(c > 0)) throw std::invalid_argument("OpenSystemOps: c must be positive");
    FullProductBasis basis(chain_length, spin, dim_cap);
    OpenSystemOps ops;
    ops.chain_length = chain_length;
    ops.spin = spin;
    ops.c = c;
    ops.dim = basis.dim();
    ops.hn = build_nonhermitian_hamiltonian(c, basis).dense();
    ops.number_op = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
    ops.constrained_projector = Eigen::MatrixXcd::Identity(basis.dim(), basis.dim());
    for (int k = 0; k < chain_length; ++k) {
        Eigen::MatrixXcd mk = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
        for (const auto& e : mk_triplets(basis, k)) mk(e.row, e.col) = e.value;
        Eigen::MatrixXcd pik = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
        for (const auto& e : pi_triplets(basis, k)) pik(e.row, e.col) = e.value;
        ops.number_op += mk.adjoint() * mk;
        ops.constrained_projector = ops.constrained_projector *
                                    (Eigen::MatrixXcd::Identity(basis.dim(), basis.dim()) - pik);
        ops.m_ops.push_back(std::move(mk));
        ops.pi_ops.push_back(std::move(pik));
    }
    return ops;
}

Eigen::MatrixXcd OpenSystemOps::liouvillian(const Eigen::MatrixXcd& rho) const {
    if (rho.rows() != static_cast<Eigen::Index>(dim) || rho.cols() != static_cast<Eigen::Index>(dim))
        throw std::invalid_argument("OpenSystemOps::liouvillian: dimension mismatch");
    Eigen::MatrixXcd out = -kI * (hn * rho) + kI * (rho * hn.adjoint());
    const double root2j = std::sqrt(2.0 * spin);
    const double root2 = std::sqrt(2.0);
    for (int k = 0; k < chain_length; ++k) {
        const auto& m = m_ops[k];
        const auto& pi = pi_ops[k];
        out += root2j * (c * (pi * rho * pi) - kI * root2 * (m * rho * pi) +
                         kI * root2 * (pi * rho * m.adjoint()));
    }
    return out;
}

std::pair<double, double> OpenSystemOps::jump_rates(const Eigen::MatrixXcd& rho) const {
    const double gamma1 = c * std::sqrt(2.0 * spin);
    const Complex irt2_over_c = kI * std::sqrt(2.0) / c;
    double p_plus = 0, p_minus = 0;
    for (int k = 0; k < chain_length; ++k) {
        const Eigen::MatrixXcd l1 = pi_ops[k] - irt2_over_c * m_ops[k];
        p_plus += gamma1 * (l1 * rho * l1.adjoint()).trace().real();
        p_minus += (2.0 * std::sqrt(2.0 * spin) / c) * (m_ops[k] * rho * m_ops[k].adjoint()).trace().real();
    }
    return {p_plus, p_minus};
}

}  // namespace scarlab
