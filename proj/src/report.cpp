// Group statistics, correlation matrix and the markdown report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "mrsi/errors.hpp"
#include "mrsi/io.hpp"
#include "mrsi/pipeline.hpp"
#include "mrsi/stats.hpp"

namespace mrsi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct VoxelRow {
  std::string label;
  int x = 0, y = 0;
  double indicator = kNaN, ff_csa = kNaN, imcl = kNaN, ff_fit = kNaN;
};

struct Metric {
  const char* key;
  const char* title;
  double VoxelRow::*field;
};

const Metric kMetrics[] = {
    {"indicator_pct", "Apparent content indicator", &VoxelRow::indicator},
    {"imcl_pct", "IMCL % (fit)", &VoxelRow::imcl},
    {"ff_fit_pct", "FF % (fit)", &VoxelRow::ff_fit},
    {"ff_csa_pct", "FF % (CSA)", &VoxelRow::ff_csa},
};

double parse_num(const std::string& s) {
  if (s == "nan" || s.empty()) return kNaN;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw InvalidArgument("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InvalidArgument("bad number '" + s + "'");
  }
}

struct Summary {
  double mean = kNaN, sd = kNaN;
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  std::vector<double> ok;
  for (double x : v) {
    if (!std::isnan(x)) ok.push_back(x);
  }
  s.n = ok.size();
  if (ok.empty()) return s;
  double sum = 0.0;
  for (double x : ok) sum += x;
  s.mean = sum / static_cast<double>(ok.size());
  if (ok.size() > 1) {
    double ss = 0.0;
    for (double x : ok) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(ok.size() - 1));
  } else {
    s.sd = 0.0;
  }
  return s;
}

std::vector<double> finite(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (!std::isnan(x)) out.push_back(x);
  }
  return out;
}

struct ReportData {
  std::string config_hash;
  std::vector<std::string> labels;  // ROIs with data, first-appearance order
  std::vector<VoxelRow> rows;
  // per metric, per label
  std::vector<std::vector<Summary>> groups;
  std::vector<double> p;        // label[0] vs label[1]
  std::vector<double> t;
  stats::CorrMatrix corr;
  bool have_regression = false;
  stats::LinReg reg;
  std::size_t reg_n = 0;
};

std::vector<double> column(const std::vector<VoxelRow>& rows, double VoxelRow::*field,
                           const std::string* label = nullptr) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!label || r.label == *label) out.push_back(r.*field);
  }
  return out;
}

std::string config_hash_of(const fs::path& csv) {
  const std::string text = io::read_text(csv);
  const std::string tag = "# config_sha256=";
  if (text.rfind(tag, 0) != 0) return "";
  return text.substr(tag.size(), text.find('\n') - tag.size());
}

ReportData compute(const fs::path& analysis_dir, const fs::path& quantify_dir) {
  ReportData d;
  const fs::path values_path = analysis_dir / "roi_values.csv";
  const fs::path fits_path = quantify_dir / "roi_fits.csv";
  const auto values = io::read_csv(values_path);
  const auto fits = io::read_csv(fits_path);
  d.config_hash = config_hash_of(values_path);

  std::map<std::tuple<std::string, int, int>, std::size_t> index;
  auto row_for = [&](const std::string& label, int x, int y) -> VoxelRow& {
    const auto key = std::make_tuple(label, x, y);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, d.rows.size()).first;
      d.rows.push_back({label, x, y});
    }
    return d.rows[it->second];
  };
  {
    const auto cl = values.column("label"), cx = values.column("x"), cy = values.column("y"),
               ci = values.column("indicator_pct"), cf = values.column("ff_csa_pct");
    for (const auto& r : values.rows) {
      auto& v = row_for(r[cl], std::stoi(r[cx]), std::stoi(r[cy]));
      v.indicator = parse_num(r[ci]);
      v.ff_csa = parse_num(r[cf]);
    }
  }
  {
    const auto cl = fits.column("label"), cx = fits.column("x"), cy = fits.column("y"),
               ci = fits.column("imcl_pct"), cf = fits.column("ff_fit_pct");
    for (const auto& r : fits.rows) {
      auto& v = row_for(r[cl], std::stoi(r[cx]), std::stoi(r[cy]));
      v.imcl = parse_num(r[ci]);
      v.ff_fit = parse_num(r[cf]);
    }
  }
  for (const auto& r : d.rows) {
    if (std::find(d.labels.begin(), d.labels.end(), r.label) == d.labels.end()) {
      d.labels.push_back(r.label);
    }
  }
  if (d.labels.size() < 2) {
    throw InvalidArgument("report needs at least two ROIs with valid aggregates, found " +
                          std::to_string(d.labels.size()));
  }

  for (const auto& m : kMetrics) {
    std::vector<Summary> g;
    for (const auto& l : d.labels) g.push_back(summarize(column(d.rows, m.field, &l)));
    d.groups.push_back(g);
    const auto a = finite(column(d.rows, m.field, &d.labels[0]));
    const auto b = finite(column(d.rows, m.field, &d.labels[1]));
    double p = kNaN, t = kNaN;
    if (a.size() >= 2 && b.size() >= 2) {
      try {
        const auto r = stats::welch_t_test(a, b);
        p = r.p;
        t = r.t;
      } catch (const DegenerateSampleError&) {
      }
    }
    d.p.push_back(p);
    d.t.push_back(t);
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (const auto& m : kMetrics) {
    names.push_back(m.key);
    cols.push_back(column(d.rows, m.field));
  }
  d.corr = stats::correlation_matrix(names, cols);

  std::vector<double> xs, ys;
  for (const auto& r : d.rows) {
    if (std::isnan(r.imcl) || std::isnan(r.indicator)) continue;
    xs.push_back(r.imcl);
    ys.push_back(r.indicator);
  }
  d.reg_n = xs.size();
  if (xs.size() >= 2) {
    try {
      d.reg = stats::linreg(xs, ys);
      d.have_regression = true;
    } catch (const UndefinedCorrelationError&) {
    }
  }
  return d;
}

std::string trend(const ReportData& d, std::size_t m) {
  const double a = d.groups[m][0].mean, b = d.groups[m][1].mean;
  if (std::isnan(a) || std::isnan(b)) return "";
  std::string s = b > a ? "up" : (b < a ? "down" : "flat");
  if (!std::isnan(d.p[m]) && d.p[m] < 0.05) s += "*";
  return s;
}

std::string arrow(const ReportData& d, std::size_t m) {
  const double a = d.groups[m][0].mean, b = d.groups[m][1].mean;
  if (std::isnan(a) || std::isnan(b)) return "";
  std::string s = b > a ? "↑" : (b < a ? "↓" : "=");
  if (!std::isnan(d.p[m]) && d.p[m] < 0.05) s += "*";
  return s;
}

StageResult write_tables(const ReportData& d, const fs::path& out_dir) {
  StageResult res;
  std::vector<std::string> header{"metric"};
  for (const auto& l : d.labels) {
    header.push_back(l + "_mean");
    header.push_back(l + "_sd");
    header.push_back(l + "_n");
  }
  header.insert(header.end(), {"t", "p", "trend"});
  io::CsvWriter group(header, d.config_hash);
  for (std::size_t m = 0; m < std::size(kMetrics); ++m) {
    std::vector<std::string> row{kMetrics[m].key};
    for (const auto& s : d.groups[m]) {
      row.push_back(io::fmt(s.mean));
      row.push_back(io::fmt(s.sd));
      row.push_back(std::to_string(s.n));
    }
    row.push_back(io::fmt(d.t[m]));
    row.push_back(io::fmt(d.p[m]));
    row.push_back(trend(d, m));
    group.row(row);
  }
  group.save(out_dir / "group_table.csv");

  std::vector<std::string> mh{"variable"};
  mh.insert(mh.end(), d.corr.names.begin(), d.corr.names.end());
  io::CsvWriter rho(mh, d.config_hash), pv(mh, d.config_hash);
  io::CsvWriter pairs({"var_a", "var_b", "rho", "p", "n", "significant", "defined"}, d.config_hash);
  for (std::size_t i = 0; i < d.corr.names.size(); ++i) {
    std::vector<std::string> r{d.corr.names[i]}, q{d.corr.names[i]};
    for (std::size_t j = 0; j < d.corr.names.size(); ++j) {
      r.push_back(io::fmt(d.corr.rho[i][j]));
      q.push_back(io::fmt(d.corr.p[i][j]));
      if (j > i) {
        pairs.row({d.corr.names[i], d.corr.names[j], io::fmt(d.corr.rho[i][j]),
                   io::fmt(d.corr.p[i][j]), std::to_string(d.corr.n[i][j]),
                   d.corr.significant[i][j] ? "1" : "0", d.corr.defined[i][j] ? "1" : "0"});
      }
    }
    rho.row(r);
    pv.row(q);
  }
  rho.save(out_dir / "corr_rho.csv");
  pv.save(out_dir / "corr_p.csv");
  pairs.save(out_dir / "corr_pairs.csv");

  io::CsvWriter reg({"x", "y", "slope", "intercept", "r2", "n"}, d.config_hash);
  reg.row({"imcl_pct", "indicator_pct", d.have_regression ? io::fmt(d.reg.slope) : "nan",
           d.have_regression ? io::fmt(d.reg.intercept) : "nan",
           d.have_regression ? io::fmt(d.reg.r2) : "nan", std::to_string(d.reg_n)});
  reg.save(out_dir / "regression.csv");

  io::CsvWriter scatter({"label", "x", "y", "imcl_pct", "indicator_pct"}, d.config_hash);
  for (const auto& r : d.rows) {
    if (std::isnan(r.imcl) || std::isnan(r.indicator)) continue;
    scatter.row({r.label, std::to_string(r.x), std::to_string(r.y), io::fmt(r.imcl),
                 io::fmt(r.indicator)});
  }
  scatter.save(out_dir / "scatter.csv");

  res.files = {out_dir / "group_table.csv", out_dir / "corr_rho.csv", out_dir / "corr_p.csv",
               out_dir / "corr_pairs.csv", out_dir / "regression.csv", out_dir / "scatter.csv"};
  return res;
}

std::string num(double v, int decimals) { return std::isnan(v) ? "n/a" : io::fmt_fixed(v, decimals); }

std::string sign_word(double bias) {
  if (std::isnan(bias)) return "undetermined";
  return bias > 0 ? "positive (overestimate)" : (bias < 0 ? "negative (underestimate)" : "zero");
}

struct TruthRow {
  double share = kNaN, ff = kNaN;
};

std::map<std::pair<int, int>, TruthRow> read_truth(const fs::path& path) {
  std::map<std::pair<int, int>, TruthRow> out;
  const auto t = io::read_csv(path);
  const auto cx = t.column("x"), cy = t.column("y"), cs = t.column("imcl_share_pct"),
             cf = t.column("ff_pct");
  for (const auto& r : t.rows) {
    out[{std::stoi(r[cx]), std::stoi(r[cy])}] = {parse_num(r[cs]), parse_num(r[cf])};
  }
  return out;
}

std::string render(const ReportData& d, const std::optional<fs::path>& truth_csv) {
  std::ostringstream md;
  md << "# MRSI lipid report\n\n";
  md << "config_sha256: `" << d.config_hash << "`\n\n";
  md << "## Group comparison\n\n";
  md << "Values are mean (SD) over ROI voxels. p is a two-sided Welch t-test of " << d.labels[1]
     << " against " << d.labels[0] << "; the arrow gives the direction of " << d.labels[1]
     << " relative to " << d.labels[0] << " and * marks p < 0.05.\n\n";
  md << "| Metric |";
  for (const auto& l : d.labels) md << " " << l << " |";
  md << " p | Trend |\n|---|";
  for (std::size_t i = 0; i < d.labels.size(); ++i) md << "---|";
  md << "---|---|\n";
  for (std::size_t m = 0; m < std::size(kMetrics); ++m) {
    md << "| " << kMetrics[m].title << " |";
    for (const auto& s : d.groups[m]) {
      md << " " << num(s.mean, 2) << " (" << num(s.sd, 2) << "), n=" << s.n << " |";
    }
    md << " " << (std::isnan(d.p[m]) ? std::string("n/a") : io::fmt_fixed(d.p[m], 4)) << " | "
       << arrow(d, m) << " |\n";
  }

  md << "\n## Spearman correlation matrix\n\n";
  md << "Pooled over all ROI voxels with pairwise deletion; bold entries have p < 0.05.\n\n|   |";
  for (const auto& m : kMetrics) md << " " << m.title << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < std::size(kMetrics); ++i) md << "---|";
  md << "\n";
  for (std::size_t i = 0; i < std::size(kMetrics); ++i) {
    md << "| " << kMetrics[i].title << " |";
    for (std::size_t j = 0; j < std::size(kMetrics); ++j) {
      if (!d.corr.defined[i][j]) {
        md << " undefined |";
      } else if (i != j && d.corr.significant[i][j]) {
        md << " **" << io::fmt_fixed(d.corr.rho[i][j], 3) << "** |";
      } else {
        md << " " << io::fmt_fixed(d.corr.rho[i][j], 3) << " |";
      }
    }
    md << "\n";
  }

  md << "\n## Regression of the indicator on IMCL % (fit)\n\n";
  if (d.have_regression) {
    md << "indicator = " << io::fmt_fixed(d.reg.slope, 4) << " x IMCL% + "
       << io::fmt_fixed(d.reg.intercept, 4) << ", r2 = " << io::fmt_fixed(d.reg.r2, 4)
       << ", n = " << d.reg_n << ". Points are in scatter.csv.\n";
  } else {
    md << "Not available (fewer than two voxels with both values, or constant IMCL %).\n";
  }

  md << "\n## Fat fraction: CSA route against fit route\n\n";
  md << "| ROI | FF % (CSA) | FF % (fit) | CSA - fit | Sign |\n|---|---|---|---|---|\n";
  for (std::size_t g = 0; g < d.labels.size(); ++g) {
    const double csa = d.groups[3][g].mean, fit = d.groups[2][g].mean;
    md << "| " << d.labels[g] << " | " << num(csa, 2) << " | " << num(fit, 2) << " | "
       << num(csa - fit, 2) << " | " << sign_word(csa - fit) << " |\n";
  }

  if (truth_csv) {
    const auto truth = read_truth(*truth_csv);
    md << "\n## Bias against the phantom ground truth\n\n";
    md << "| ROI | true FF % | FF % (CSA) bias | FF % (fit) bias | CSA bias sign | true IMCL share % "
          "| IMCL % (fit) bias |\n|---|---|---|---|---|---|---|\n";
    for (const auto& label : d.labels) {
      std::vector<double> tff, tsh, bcsa, bfit, bimcl;
      for (const auto& r : d.rows) {
        if (r.label != label) continue;
        const auto it = truth.find({r.x, r.y});
        if (it == truth.end()) continue;
        tff.push_back(it->second.ff);
        tsh.push_back(it->second.share);
        bcsa.push_back(r.ff_csa - it->second.ff);
        bfit.push_back(r.ff_fit - it->second.ff);
        bimcl.push_back(r.imcl - it->second.share);
      }
      const double mc = summarize(bcsa).mean;
      md << "| " << label << " | " << num(summarize(tff).mean, 2) << " | " << num(mc, 2) << " | "
         << num(summarize(bfit).mean, 2) << " | " << sign_word(mc) << " | "
         << num(summarize(tsh).mean, 2) << " | " << num(summarize(bimcl).mean, 2) << " |\n";
    }
    md << "\nThe CSA route sums magnitude-spectrum amplitudes over fixed bands, so the broad "
          "Lorentzian tails of the water line that reach into the lipid band count as lipid; "
          "a positive CSA bias is expected.\n";
  }
  return md.str();
}

}  // namespace

StageResult stats_stage(const fs::path& analysis_dir, const fs::path& quantify_dir,
                        const fs::path& out_dir) {
  const ReportData d = compute(analysis_dir, quantify_dir);
  return write_tables(d, out_dir);
}

StageResult report_stage(const fs::path& analysis_dir, const fs::path& quantify_dir,
                         const fs::path& out_dir, const std::optional<fs::path>& truth_csv) {
  const ReportData d = compute(analysis_dir, quantify_dir);
  StageResult res = write_tables(d, out_dir);
  io::write_text(out_dir / "report.md", render(d, truth_csv));
  res.files.push_back(out_dir / "report.md");
  return res;
}

}  // namespace mrsi
