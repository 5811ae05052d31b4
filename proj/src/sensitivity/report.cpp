#include "forge/sensitivity/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "forge/lm/model.hpp"
#include "forge/sensitivity/nuclear_norm.hpp"

namespace forge::sensitivity {

namespace {

LayerNorms norms_of(const lm::GradBuffers<double>& g, int layer) {
  return {layer, nuclear_norm(g.layer(layer, lm::LayerSlot::Wq)),
          nuclear_norm(g.layer(layer, lm::LayerSlot::Wk)),
          nuclear_norm(g.layer(layer, lm::LayerSlot::Wv))};
}

std::string real(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

GradientReport layer_gradient_report(const lm::Params<float>& params,
                                     const std::vector<lm::Batch>& probe,
                                     const ProbeOptions& options) {
  if (probe.empty()) throw Error("gradient probe needs at least one batch");
  const auto p = params.cast<double>();
  const int n_layers = p.config.n_layers;
  GradientReport report;
  report.probe = {options.dataset, probe.size(), options.seed};
  auto grads = lm::GradBuffers<double>::zeros(p.config);

  if (!options.per_batch) {
    for (const auto& b : probe) lm::accumulate_loss_and_backward(p, b, grads, options.loss_scale);
    for (int l = 0; l < n_layers; ++l) report.layers.push_back(norms_of(grads, l));
    return report;
  }
  report.layers.resize(static_cast<std::size_t>(n_layers));
  for (int l = 0; l < n_layers; ++l) report.layers[static_cast<std::size_t>(l)].layer = l;
  for (const auto& b : probe) {
    grads.set_zero();
    lm::accumulate_loss_and_backward(p, b, grads, options.loss_scale);
    for (int l = 0; l < n_layers; ++l) {
      const auto n = norms_of(grads, l);
      auto& row = report.layers[static_cast<std::size_t>(l)];
      row.q += n.q;
      row.k += n.k;
      row.v += n.v;
    }
  }
  const auto count = static_cast<double>(probe.size());
  for (auto& row : report.layers) {
    row.q /= count;
    row.k /= count;
    row.v /= count;
  }
  return report;
}

std::string render_csv(const GradientReport& report) {
  std::string out = "layer,q_norm,k_norm,v_norm\n";
  for (const auto& r : report.layers)
    out += std::to_string(r.layer) + "," + real(r.q) + "," + real(r.k) + "," + real(r.v) + "\n";
  return out;
}

GradientReport parse_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "layer,q_norm,k_norm,v_norm")
    throw Error("gradient report CSV: missing header");
  GradientReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LayerNorms row;
    std::istringstream fields(line);
    std::string f[4];
    for (auto& s : f)
      if (!std::getline(fields, s, ',')) throw Error("gradient report CSV: short row");
    auto parse = [&](const std::string& s, auto& out) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("gradient report CSV: bad field '" + s + "'");
    };
    parse(f[0], row.layer);
    parse(f[1], row.q);
    parse(f[2], row.k);
    parse(f[3], row.v);
    report.layers.push_back(row);
  }
  return report;
}

std::string render_bars(const GradientReport& report, int width) {
  double top = 0;
  for (const auto& r : report.layers) top = std::max({top, r.q, r.k, r.v});
  std::string out;
  auto bar = [&](double v) {
    const int n = top > 0 ? static_cast<int>(std::lround(width * v / top)) : 0;
    return std::string(static_cast<std::size_t>(n), '#');
  };
  const char* names[] = {"Q", "K", "V"};
  for (int m = 0; m < 3; ++m) {
    out += std::string(names[m]) + "\n";
    for (const auto& r : report.layers) {
      const double v = m == 0 ? r.q : (m == 1 ? r.k : r.v);
      char label[16];
      std::snprintf(label, sizeof label, "%4d | ", r.layer);
      out += label + bar(v) + " " + real(v) + "\n";
    }
  }
  return out;
}

}  // namespace forge::sensitivity
