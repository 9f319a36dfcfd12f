#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "wavepanel/distributions.hpp"
#include "wavepanel/errors.hpp"
#include "wavepanel/indices.hpp"
#include "wavepanel/panel.hpp"
#include "wavepanel/stats.hpp"

namespace wavepanel {

// Named design matrix (no intercept column; the fit adds one).
struct Design {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    void add(const std::string& name, std::vector<double> col) {
        names.push_back(name);
        cols.push_back(std::move(col));
    }
};

struct RegressionFit {
    std::vector<std::string> names;  // "(intercept)" first
    std::vector<double> coef;
    std::vector<double> se;
    std::vector<double> p_value;        // two-sided t test on raw coefficients
    std::vector<double> std_coef;       // NaN for the intercept
    std::vector<double> std_ci_low;
    std::vector<double> std_ci_high;
    std::vector<double> residuals;
    std::vector<double> fitted;
    size_t n = 0;
    double r_squared = 0.0;
};

// First principal component of z-scored cardiovascular death rate and life
// expectancy, oriented so the cardiovascular loading is positive (higher
// score = worse baseline health). Closed form for two variables: the PC1
// direction is (1, sign(r))/sqrt(2).
inline std::vector<double> health_pc(const std::vector<CountryCovariates>& covs) {
    size_t n = covs.size();
    if (n < 3) throw DomainError("health_pc: need at least 3 countries");
    std::vector<double> cardio(n), life(n);
    for (size_t i = 0; i < n; ++i) {
        cardio[i] = covs[i].cardio_death_rate;
        life[i] = covs[i].life_expectancy;
    }
    double sd_c = sample_sd(cardio), sd_l = sample_sd(life);
    if (sd_c == 0.0 || sd_l == 0.0) throw DomainError("health_pc: constant variable");
    double m_c = mean(cardio), m_l = mean(life);
    std::vector<double> z1(n), z2(n);
    for (size_t i = 0; i < n; ++i) {
        z1[i] = (cardio[i] - m_c) / sd_c;
        z2[i] = (life[i] - m_l) / sd_l;
    }
    double r = pearson(z1, z2);
    double s = (r >= 0.0) ? 1.0 : -1.0;
    std::vector<double> pc(n);
    for (size_t i = 0; i < n; ++i) pc[i] = (z1[i] + s * z2[i]) / std::sqrt(2.0);
    return pc;
}

namespace detail {

// Raw slopes and standardized slopes as a function of the joint covariance
// matrix S of (y, x_1..x_k). Used by the delta-method gradient below.
inline Eigen::VectorXd std_coefs_from_cov(const Eigen::MatrixXd& S) {
    int k = static_cast<int>(S.rows()) - 1;
    Eigen::MatrixXd Sxx = S.block(1, 1, k, k);
    Eigen::VectorXd Sxy = S.block(1, 0, k, 1);
    Eigen::VectorXd beta = Sxx.ldlt().solve(Sxy);
    Eigen::VectorXd out(k);
    for (int j = 0; j < k; ++j) {
        out[j] = beta[j] * std::sqrt(Sxx(j, j) / S(0, 0));
    }
    return out;
}

}  // namespace detail

// OLS with intercept via column-pivoted QR. Classical standard errors,
// two-sided t p-values on the raw coefficients, and (optionally)
// standardized coefficients b*sd(x)/sd(y) with delta-method confidence
// intervals under the multivariate normal approximation: the standardized
// coefficients are viewed as functions of the joint sample covariance of
// (y, X), whose asymptotic covariance is
//   Cov(S_ij, S_kl) = (S_ik S_jl + S_il S_jk) / (n - 1),
// and the gradient is taken by central finite differences.
inline RegressionFit ols_fit(const std::vector<double>& y, const Design& design,
                             bool standardize = true, double alpha = 0.05) {
    const size_t n = y.size();
    const size_t k = design.cols.size();
    for (const auto& col : design.cols) {
        if (col.size() != n) throw DomainError("ols_fit: column length mismatch");
    }
    if (n <= k + 1) throw DomainError("ols_fit: need n > number of regressors + 1");

    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd Y(n);
    for (size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        Y(i) = y[i];
        for (size_t j = 0; j < k; ++j) X(i, j + 1) = design.cols[j][i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k + 1)) {
        // Columns whose pivot fell beyond the numerical rank are the
        // dependent ones.
        std::string bad;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index pos = qr.rank(); pos < perm.size(); ++pos) {
            int col = perm[pos];
            std::string name = (col == 0) ? "(intercept)" : design.names[col - 1];
            bad += (bad.empty() ? "" : ", ") + name;
        }
        throw DomainError("ols_fit: rank-deficient design, collinear columns: " + bad);
    }

    Eigen::VectorXd beta = qr.solve(Y);
    Eigen::VectorXd fitted = X * beta;
    Eigen::VectorXd resid = Y - fitted;
    double rss = resid.squaredNorm();
    double dof = static_cast<double>(n) - static_cast<double>(k + 1);
    double sigma2 = rss / dof;
    Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
    Eigen::MatrixXd cov_beta = sigma2 * xtx_inv;

    RegressionFit fit;
    fit.n = n;
    fit.names.push_back("(intercept)");
    for (const auto& nm : design.names) fit.names.push_back(nm);
    double ymean = Y.mean();
    double tss = (Y.array() - ymean).square().sum();
    fit.r_squared = (tss > 0.0) ? 1.0 - rss / tss : 0.0;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t j = 0; j <= k; ++j) {
        fit.coef.push_back(beta[j]);
        double sej = std::sqrt(cov_beta(j, j));
        fit.se.push_back(sej);
        double t = (sej > 0.0) ? beta[j] / sej : 0.0;
        fit.p_value.push_back(sej > 0.0 ? student_t_pvalue(t, dof) : 1.0);
        fit.std_coef.push_back(nan);
        fit.std_ci_low.push_back(nan);
        fit.std_ci_high.push_back(nan);
    }
    fit.residuals.assign(resid.data(), resid.data() + n);
    fit.fitted.assign(fitted.data(), fitted.data() + n);

    if (standardize && k > 0) {
        // Joint sample covariance of (y, x_1..x_k), divisor n-1.
        Eigen::MatrixXd V(n, k + 1);
        V.col(0) = Y;
        for (size_t j = 0; j < k; ++j) {
            V.col(j + 1) = X.col(j + 1);
        }
        Eigen::RowVectorXd means = V.colwise().mean();
        Eigen::MatrixXd centered = V.rowwise() - means;
        Eigen::MatrixXd S = centered.transpose() * centered / (static_cast<double>(n) - 1.0);

        Eigen::VectorXd bstd = detail::std_coefs_from_cov(S);

        // Gradient of each standardized coefficient wrt the unique entries
        // of S; then Var = g' Gamma g with the MVN covariance of sample
        // covariances.
        int p = static_cast<int>(k) + 1;
        std::vector<std::pair<int, int>> entries;
        for (int a = 0; a < p; ++a) {
            for (int b = a; b < p; ++b) entries.emplace_back(a, b);
        }
        int m = static_cast<int>(entries.size());
        Eigen::MatrixXd grad(static_cast<int>(k), m);
        for (int e = 0; e < m; ++e) {
            auto [a, b] = entries[e];
            double h = 1e-6 * std::max(1.0, std::fabs(S(a, b)));
            Eigen::MatrixXd Sp = S, Sm = S;
            Sp(a, b) += h;
            Sm(a, b) -= h;
            if (a != b) {
                Sp(b, a) += h;
                Sm(b, a) -= h;
            }
            Eigen::VectorXd fp = detail::std_coefs_from_cov(Sp);
            Eigen::VectorXd fm = detail::std_coefs_from_cov(Sm);
            grad.col(e) = (fp - fm) / (2.0 * h);
        }
        Eigen::MatrixXd gamma(m, m);
        double denom = static_cast<double>(n) - 1.0;
        for (int e1 = 0; e1 < m; ++e1) {
            auto [i, j] = entries[e1];
            for (int e2 = 0; e2 < m; ++e2) {
                auto [kk, l] = entries[e2];
                gamma(e1, e2) = (S(i, kk) * S(j, l) + S(i, l) * S(j, kk)) / denom;
            }
        }
        Eigen::MatrixXd var_std = grad * gamma * grad.transpose();
        double z = normal_quantile(1.0 - alpha / 2.0);
        for (size_t j = 0; j < k; ++j) {
            double sd = std::sqrt(std::max(0.0, var_std(j, j)));
            fit.std_coef[j + 1] = bstd[j];
            fit.std_ci_low[j + 1] = bstd[j] - z * sd;
            fit.std_ci_high[j + 1] = bstd[j] + z * sd;
        }
    }
    return fit;
}

// The two reverse-causality fits: (a) per-wave maskpeakwave on maskbeginwave
// and mean wave mortality; (b) per-country maskinwave on maskinterwave and
// total COVID-19 deaths per million.
inline std::pair<RegressionFit, RegressionFit> reverse_causality_regressions(
    const std::vector<WaveMaskRecord>& records, const MaskIndexTable& indices,
    const PanelDataset& ds) {
    std::vector<double> peak, begin, mortality;
    for (const auto& r : records) {
        if (!r.valid) continue;
        peak.push_back(r.peak_avg);
        begin.push_back(r.begin_avg);
        mortality.push_back(r.wave_deaths_pm_mean);
    }
    Design da;
    da.add("maskbeginwave", begin);
    da.add("wave_mortality", mortality);
    RegressionFit fit_a = ols_fit(peak, da);

    std::vector<double> inwave = indices.column("maskinwave");
    std::vector<double> interwave = indices.column("maskinterwave");
    std::vector<double> total(ds.n_countries());
    for (size_t c = 0; c < ds.n_countries(); ++c) {
        total[c] = ds.total_deaths_pm(static_cast<int>(c));
    }
    Design db;
    db.add("maskinterwave", interwave);
    db.add("total_deaths_pm", total);
    RegressionFit fit_b = ols_fit(inwave, db);

    return {fit_a, fit_b};
}

}  // namespace wavepanel
