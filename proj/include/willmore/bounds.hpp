#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace willmore {

double li_yau_bound(int k);

enum class Provenance { exact, numeric, user };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct BetaEntry {
    double value;
    Provenance provenance;
};

/// Infima beta_g of W over genus-g closed surfaces. Ships with beta_1 = 2 pi^2
/// only; higher genera must be supplied.
class BetaTable {
public:
    BetaTable();  // {1: 2 pi^2, exact}
    static BetaTable empty();

    void set(int genus, double value, Provenance provenance);
    bool has(int genus) const { return entries_.count(genus) != 0; }
    double at(int genus) const;
    const BetaEntry& entry(int genus) const;
    const std::map<int, BetaEntry>& entries() const { return entries_; }

    /// Lines "genus,beta,provenance" after a "# beta table" comment header.
    std::string to_csv() const;
    static BetaTable from_csv(const std::string& text);

private:
    std::map<int, BetaEntry> entries_;
};

/// 4 pi + min over partitions g = g_1 + ... + g_p (1 <= g_i < g) of
/// sum (beta_{g_i} - 4 pi). +infinity for g = 1.
double omega_g(int g, const BetaTable& betas);

/// Same minimum by explicit enumeration of partitions. Test oracle.
double omega_g_brute_force(int g, const BetaTable& betas);

/// Sampled R -> W(R) of the W-minimising spheres at prescribed iso ratio.
class SchygullaCurve {
public:
    /// Samples in any order. Throws std::invalid_argument on W >= 8 pi,
    /// W < 0.98 * 4 pi, R < 36 pi (1 - 0.02) or duplicate R.
    explicit SchygullaCurve(std::vector<std::pair<double, double>> samples, bool anchor_round_sphere = false);

    /// Samples after pool-adjacent-violators cleanup, sorted by R.
    const std::vector<std::pair<double, double>>& samples() const { return cleaned_; }
    const std::vector<std::pair<double, double>>& raw_samples() const { return raw_; }
    /// Indices (into raw_samples) that the cleanup changed.
    const std::vector<std::size_t>& monotone_violations() const { return violations_; }

    double min_r() const { return cleaned_.front().first; }
    double max_r() const { return cleaned_.back().first; }
    /// Piecewise-linear interpolation; throws std::out_of_range outside the samples.
    double operator()(double r) const;

    /// "# schygulla curve" header then "R,W" lines.
    std::string to_csv() const;
    static SchygullaCurve from_csv(const std::string& text, bool anchor_round_sphere = false);

private:
    std::vector<std::pair<double, double>> raw_;
    std::vector<std::pair<double, double>> cleaned_;
    std::vector<std::size_t> violations_;
};

struct IgThreshold {
    double threshold;
    double eight_pi;
    double omega;    // +inf for g = 1
    double sphere;   // beta_g + W(R) - 4 pi
};

IgThreshold ig_threshold(double r, int g, const BetaTable& betas, const SchygullaCurve& curve);

}  // namespace willmore
