#include "tts/csv.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tts/linalg.hpp"

namespace tts {

namespace {

double safe_spectral_norm(const Matrix& m) {
  if (!m.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  return spectral_norm(m);
}

void write_rows(std::ostream& out, const EnsembleStats& stats, double theory_norm,
                int precision, const std::string& extra_header,
                const std::string& extra_fields) {
  out << "k,alpha_k,beta_k,norm_Eyy,norm_Exy,norm_Exx,ratio_y,ratio_x,stderr_y,"
         "diverged_paths,theory_norm_sigma_y"
      << extra_header << '\n';
  for (std::size_t c = 0; c < stats.checkpoints.size(); ++c) {
    const double norm_yy = stats.ratio_y[c] * stats.beta_k[c];
    const double norm_xx = stats.ratio_x[c] * stats.alpha_k[c];
    const double norm_xy = safe_spectral_norm(stats.e_xy[c]);
    out << stats.checkpoints[c] << ',' << format_number(stats.alpha_k[c], precision)
        << ',' << format_number(stats.beta_k[c], precision) << ','
        << format_number(norm_yy, precision) << ',' << format_number(norm_xy, precision)
        << ',' << format_number(norm_xx, precision) << ','
        << format_number(stats.ratio_y[c], precision) << ','
        << format_number(stats.ratio_x[c], precision) << ','
        << format_number(stats.stderr_y[c], precision) << ',' << stats.diverged_paths[c]
        << ',' << format_number(theory_norm, precision) << extra_fields << '\n';
  }
}

}  // namespace

std::string format_number(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
  return buffer;
}

void write_simulation_csv(std::ostream& out, const EnsembleStats& stats,
                          double theory_norm_sigma_y, int precision) {
  write_rows(out, stats, theory_norm_sigma_y, precision, "", "");
}

void write_rl_csv(std::ostream& out, const EnsembleStats& stats,
                  double theory_norm_sigma_y, const Vector& theta_star,
                  double trace_sigma_theta, int precision) {
  std::string header;
  std::string fields;
  for (Eigen::Index i = 0; i < theta_star.size(); ++i) {
    header += ",theta_star_" + std::to_string(i + 1);
    fields += "," + format_number(theta_star(i), precision);
  }
  header += ",trace_sigma_theta";
  fields += "," + format_number(trace_sigma_theta, precision);
  write_rows(out, stats, theory_norm_sigma_y, precision, header, fields);
}

}  // namespace tts
