// Slow, independent reference implementations used only by the tests.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/property_tree/detail/rapidxml.hpp>

namespace oracle {

inline double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// |X[k]|^2 by the textbook O(n^2) sum.
inline std::vector<double> dft_power(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n / 2 + 1);
  std::vector<long double> c(n), s(n);
  for (std::size_t t = 0; t < n; ++t) {
    const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(t) /
                            static_cast<long double>(n);
    c[t] = std::cos(ang);
    s[t] = std::sin(ang);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * c[k * t % n];
      im += x[t] * s[k * t % n];
    }
    out[k] = static_cast<double>(re * re + im * im);
  }
  return out;
}

inline double dft_peak_hz(const std::vector<double>& x, double sample_rate) {
  const auto p = dft_power(x);
  std::size_t best = 1;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return static_cast<double>(best) * sample_rate / static_cast<double>(x.size());
}

struct MfccParams {
  std::size_t n_fft = 1024, hop = 512, n_mels = 40, n_coeffs = 13;
  double pre_emphasis = 0.97, fmin = 0.0, fmax = 0.0, floor = 1e-10;
};

// Straight-line MFCC: pre-emphasis, periodic Hann, direct DFT, triangular mel
// bank, log, orthonormal DCT-II, mean over frames.
inline std::vector<double> mfcc(const std::vector<double>& clip, double sr, const MfccParams& p) {
  const double fmax = p.fmax > 0 ? p.fmax : sr / 2;
  std::vector<double> edges(p.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = inv_mel(mel(p.fmin) + (mel(fmax) - mel(p.fmin)) * double(i) / double(p.n_mels + 1));
  }
  std::vector<double> y(clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i) y[i] = clip[i] - (i ? p.pre_emphasis * clip[i - 1] : 0.0);

  std::vector<double> acc(p.n_coeffs, 0.0);
  std::size_t frames = 0;
  for (std::size_t start = 0; start + p.n_fft <= y.size(); start += p.hop, ++frames) {
    std::vector<double> fr(p.n_fft);
    for (std::size_t i = 0; i < p.n_fft; ++i) {
      fr[i] = y[start + i] * (0.5 - 0.5 * std::cos(2 * std::numbers::pi * double(i) / double(p.n_fft)));
    }
    const auto pw = dft_power(fr);
    std::vector<double> logmel(p.n_mels);
    for (std::size_t m = 0; m < p.n_mels; ++m) {
      double e = 0;
      for (std::size_t k = 0; k < pw.size(); ++k) {
        const double f = double(k) * sr / double(p.n_fft);
        double w = 0;
        if (f > edges[m] && f <= edges[m + 1]) w = (f - edges[m]) / (edges[m + 1] - edges[m]);
        if (f > edges[m + 1] && f < edges[m + 2]) w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        e += w * pw[k];
      }
      logmel[m] = std::log(std::max(e, p.floor));
    }
    for (std::size_t c = 0; c < p.n_coeffs; ++c) {
      double s = 0;
      for (std::size_t m = 0; m < p.n_mels; ++m) {
        s += logmel[m] * std::cos(std::numbers::pi * double(c) * (2.0 * double(m) + 1) / (2.0 * double(p.n_mels)));
      }
      acc[c] += s * std::sqrt((c == 0 ? 1.0 : 2.0) / double(p.n_mels));
    }
  }
  for (double& v : acc) v /= double(frames);
  return acc;
}

inline std::vector<double> sine(double hz, double sr, std::size_t n, double amp = 0.5) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = amp * std::sin(2 * std::numbers::pi * hz * double(i) / sr);
  return out;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

// Well-formedness via rapidxml with closing-tag validation; exactly one root element.
inline bool well_formed_xml(std::string text, std::string* why = nullptr) {
  namespace rx = boost::property_tree::detail::rapidxml;
  try {
    rx::xml_document<char> doc;
    doc.parse<rx::parse_full>(text.data());
    int roots = 0;
    for (auto* n = doc.first_node(); n; n = n->next_sibling()) {
      if (n->type() == rx::node_element) ++roots;
      if (n->type() == rx::node_data) {
        if (why) *why = "text outside root";
        return false;
      }
    }
    if (roots != 1) {
      if (why) *why = "expected one root element, found " + std::to_string(roots);
      return false;
    }
    return true;
  } catch (const rx::parse_error& e) {
    if (why) *why = e.what();
    return false;
  }
}

// Attribute values of every element named `tag`, depth first.
inline std::vector<std::string> xml_attributes(std::string text, const std::string& tag,
                                               const std::string& attr) {
  namespace rx = boost::property_tree::detail::rapidxml;
  rx::xml_document<char> doc;
  doc.parse<rx::parse_full>(text.data());
  std::vector<std::string> out;
  std::vector<rx::xml_node<char>*> stack;
  for (auto* n = doc.first_node(); n; n = n->next_sibling()) stack.push_back(n);
  std::vector<rx::xml_node<char>*> order;
  while (!stack.empty()) {
    auto* n = stack.front();
    stack.erase(stack.begin());
    order.push_back(n);
    std::vector<rx::xml_node<char>*> kids;
    for (auto* c = n->first_node(); c; c = c->next_sibling()) kids.push_back(c);
    stack.insert(stack.begin(), kids.begin(), kids.end());
  }
  for (auto* n : order) {
    if (n->type() != rx::node_element || tag != n->name()) continue;
    if (auto* a = n->first_attribute(attr.c_str())) out.emplace_back(a->value());
  }
  return out;
}

}  // namespace oracle
