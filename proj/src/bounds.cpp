#include "willmore/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace willmore {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

double parse_double(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    return out;
}

// Data lines of a CSV body: comments, blanks and a non-numeric header skipped.
std::vector<std::vector<std::string>> data_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (first) {
            first = false;
            try {
                parse_double(fields.front());
            } catch (const std::invalid_argument&) {
                continue;
            }
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

double li_yau_bound(int k)
{
    if (k < 1) throw std::invalid_argument("li_yau_bound: k must be >= 1");
    return 4.0 * kPi * k;
}

std::string to_string(Provenance p)
{
    switch (p) {
    case Provenance::exact: return "exact";
    case Provenance::numeric: return "numeric";
    case Provenance::user: return "user";
    }
    return "user";
}

Provenance provenance_from_string(const std::string& s)
{
    if (s == "exact") return Provenance::exact;
    if (s == "numeric") return Provenance::numeric;
    if (s == "user") return Provenance::user;
    throw std::invalid_argument("unknown provenance '" + s + "'");
}

BetaTable::BetaTable() { set(1, 2.0 * kPi * kPi, Provenance::exact); }

BetaTable BetaTable::empty()
{
    BetaTable t;
    t.entries_.clear();
    return t;
}

void BetaTable::set(int genus, double value, Provenance provenance)
{
    if (genus < 1) throw std::invalid_argument("beta table: genus must be >= 1");
    if (!(value >= 4.0 * kPi && value < 8.0 * kPi))
        throw std::invalid_argument("beta table: beta_" + std::to_string(genus) + " = " + fmt17(value) +
                                    " outside [4 pi, 8 pi)");
    entries_[genus] = {value, provenance};
}

const BetaEntry& BetaTable::entry(int genus) const
{
    const auto it = entries_.find(genus);
    if (it == entries_.end()) throw std::out_of_range("beta table: no entry for genus " + std::to_string(genus));
    return it->second;
}

double BetaTable::at(int genus) const { return entry(genus).value; }

std::string BetaTable::to_csv() const
{
    std::ostringstream out;
    out << "# beta table: genus,beta,provenance\n";
    for (const auto& [g, e] : entries_) out << g << ',' << fmt17(e.value) << ',' << to_string(e.provenance) << '\n';
    return out.str();
}

BetaTable BetaTable::from_csv(const std::string& text)
{
    auto t = BetaTable::empty();
    for (const auto& row : data_rows(text)) {
        if (row.size() < 2 || row.size() > 3) throw std::invalid_argument("beta table: expected genus,beta[,provenance]");
        const double g = parse_double(row[0]);
        if (g != std::floor(g)) throw std::invalid_argument("beta table: genus must be an integer");
        t.set(static_cast<int>(g), parse_double(row[1]),
              row.size() == 3 ? provenance_from_string(row[2]) : Provenance::user);
    }
    return t;
}

double omega_g(int g, const BetaTable& betas)
{
    if (g < 1) throw std::invalid_argument("omega_g: genus must be >= 1");
    if (g == 1) return kInf;
    // best[n][m]: min over partitions of n into parts <= m of c_p1 + (c_p2 + (... + c_pk)),
    // parts non-increasing; same fold as the enumeration, so the two agree bitwise
    const auto n_g = static_cast<std::size_t>(g);
    std::vector<double> c(n_g, 0.0);
    for (int k = 1; k < g; ++k) c[static_cast<std::size_t>(k)] = betas.at(k) - 4.0 * kPi;
    std::vector<std::vector<double>> best(n_g + 1, std::vector<double>(n_g, kInf));
    for (auto& b : best[0]) b = 0.0;
    for (int n = 1; n <= g; ++n)
        for (int m = 1; m < g; ++m) {
            double v = kInf;
            for (int k = 1; k <= std::min(n, m); ++k)
                v = std::min(v, c[static_cast<std::size_t>(k)] + best[static_cast<std::size_t>(n - k)][static_cast<std::size_t>(k)]);
            best[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = v;
        }
    return 4.0 * kPi + best[n_g][n_g - 1];
}

double omega_g_brute_force(int g, const BetaTable& betas)
{
    if (g < 1) throw std::invalid_argument("omega_g: genus must be >= 1");
    double best = kInf;
    std::vector<int> parts;
    // non-increasing parts, each < g
    const std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        if (remaining == 0) {
            double s = 0.0;
            for (auto it = parts.rbegin(); it != parts.rend(); ++it) s = (betas.at(*it) - 4.0 * kPi) + s;
            best = std::min(best, 4.0 * kPi + s);
            return;
        }
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            parts.push_back(p);
            rec(remaining - p, p);
            parts.pop_back();
        }
    };
    rec(g, g - 1);
    return best;
}

SchygullaCurve::SchygullaCurve(std::vector<std::pair<double, double>> samples, bool anchor_round_sphere)
{
    const double r0 = 36.0 * kPi;
    if (anchor_round_sphere && std::none_of(samples.begin(), samples.end(), [&](const auto& s) { return s.first == r0; }))
        samples.emplace_back(r0, 4.0 * kPi);
    if (samples.empty()) throw std::invalid_argument("schygulla curve: no samples");
    for (const auto& [r, w] : samples) {
        if (!std::isfinite(r) || r < r0 * (1.0 - 0.02))
            throw std::invalid_argument("schygulla curve: R = " + fmt17(r) + " below 36 pi");
        if (!(w < 8.0 * kPi)) throw std::invalid_argument("schygulla curve: W = " + fmt17(w) + " >= 8 pi");
        if (!(w >= 4.0 * kPi * (1.0 - 0.02)))
            throw std::invalid_argument("schygulla curve: W = " + fmt17(w) + " below 4 pi (1 - 0.02)");
    }
    std::sort(samples.begin(), samples.end());
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].first == samples[i - 1].first)
            throw std::invalid_argument("schygulla curve: duplicate R = " + fmt17(samples[i].first));
    raw_ = samples;

    // pool adjacent violators, equal weights
    struct Block {
        double sum;
        int count;
        double mean() const { return sum / count; }
    };
    std::vector<Block> blocks;
    for (const auto& s : raw_) {
        blocks.push_back({s.second, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            blocks[blocks.size() - 2].sum += blocks.back().sum;
            blocks[blocks.size() - 2].count += blocks.back().count;
            blocks.pop_back();
        }
    }
    cleaned_ = raw_;
    std::size_t i = 0;
    for (const auto& b : blocks)
        for (int k = 0; k < b.count; ++k, ++i) {
            if (b.count > 1) cleaned_[i].second = b.mean();
            if (cleaned_[i].second != raw_[i].second) violations_.push_back(i);
        }
}

double SchygullaCurve::operator()(double r) const
{
    if (!(r >= min_r() && r <= max_r()))
        throw std::out_of_range("schygulla curve: R = " + fmt17(r) + " outside sampled range [" + fmt17(min_r()) +
                                ", " + fmt17(max_r()) + "]");
    const auto it = std::lower_bound(cleaned_.begin(), cleaned_.end(), r,
                                     [](const auto& s, double x) { return s.first < x; });
    if (it->first == r) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (r - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

std::string SchygullaCurve::to_csv() const
{
    std::ostringstream out;
    out << "# schygulla curve: monotone cleaned samples (" << violations_.size() << " adjusted)\n";
    for (std::size_t i : violations_)
        out << "# adjusted R=" << fmt17(raw_[i].first) << " raw W=" << fmt17(raw_[i].second)
            << " cleaned W=" << fmt17(cleaned_[i].second) << '\n';
    out << "R,W\n";
    for (const auto& [r, w] : cleaned_) out << fmt17(r) << ',' << fmt17(w) << '\n';
    return out.str();
}

SchygullaCurve SchygullaCurve::from_csv(const std::string& text, bool anchor_round_sphere)
{
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : data_rows(text)) {
        if (row.size() != 2) throw std::invalid_argument("schygulla curve: expected R,W");
        samples.emplace_back(parse_double(row[0]), parse_double(row[1]));
    }
    return SchygullaCurve(std::move(samples), anchor_round_sphere);
}

IgThreshold ig_threshold(double r, int g, const BetaTable& betas, const SchygullaCurve& curve)
{
    if (!(r >= 36.0 * kPi)) throw std::invalid_argument("ig_threshold: R = " + fmt17(r) + " below 36 pi");
    IgThreshold out;
    out.eight_pi = 8.0 * kPi;
    out.omega = omega_g(g, betas);
    out.sphere = betas.at(g) + curve(r) - 4.0 * kPi;
    out.threshold = std::min({out.eight_pi, out.omega, out.sphere});
    return out;
}

}  // namespace willmore
