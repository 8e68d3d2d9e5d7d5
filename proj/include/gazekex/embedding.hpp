#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gazekex/error.hpp"

namespace gazekex {

// Word -> dense vector, one fixed dimension for the whole table.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw ContractError("embedding dimension must be positive");
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }

  void add(const std::string& word, std::vector<double> vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.empty() || vec.size() != dim_) {
      throw ShapeError("embedding for '" + word + "' has dimension " + std::to_string(vec.size()) +
                       ", table uses " + std::to_string(dim_));
    }
    vectors_[word] = std::move(vec);
  }

  bool contains(const std::string& word) const { return vectors_.count(word) > 0; }

  const std::vector<double>* find(const std::string& word) const {
    auto it = vectors_.find(word);
    return it == vectors_.end() ? nullptr : &it->second;
  }

  const std::vector<double>& at(const std::string& word) const {
    auto it = vectors_.find(word);
    if (it == vectors_.end()) throw ContractError("no embedding for '" + word + "'");
    return it->second;
  }

  // Text format: one line per word, `word v1 v2 ... vd`, dimension taken
  // from the first line.
  static EmbeddingTable load_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);
    EmbeddingTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string word;
      ss >> word;
      if (word.empty()) throw ParseError(path, lineno, "missing word");
      std::vector<double> vec;
      double v;
      while (ss >> v) vec.push_back(v);
      if (!ss.eof()) throw ParseError(path, lineno, "bad vector component");
      if (vec.empty()) throw ParseError(path, lineno, "no vector components");
      if (table.dim_ != 0 && vec.size() != table.dim_) {
        throw ParseError(path, lineno, "dimension " + std::to_string(vec.size()) +
                                           " disagrees with " + std::to_string(table.dim_));
      }
      table.add(word, std::move(vec));
    }
    return table;
  }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

// dot(u,v) / (|u||v|). A zero vector has no direction, so similarity against
// it is undefined rather than silently zero.
inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine: dimensions " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  if (u.empty()) throw ShapeError("cosine: empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw EvalError("cosine similarity undefined for a zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace gazekex
