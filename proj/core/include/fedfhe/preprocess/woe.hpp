#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/preprocess/binning.hpp"
#include "fedfhe/simnet/network.hpp"

namespace fedfhe::preprocess {

struct WoeTable {
  BinSpec spec;
  std::vector<std::uint64_t> good;  // positives per bin
  std::vector<std::uint64_t> bad;   // negatives per bin
  std::uint64_t good_total = 0;
  std::uint64_t bad_total = 0;
  std::vector<double> woe;

  double encode(double v) const { return woe[spec.bin_of(v)]; }
};

// ln((G_i / G_T) / (B_i / B_T)), an empty cell counting as 0.5.
// Throws empty_input when either class is absent.
WoeTable woe_from_counts(const BinSpec& spec, std::vector<std::uint64_t> good,
                         std::span<const std::size_t> populations);

// y in {0, 1}; 1 is the positive ("good") class.
WoeTable woe_plain(const BinSpec& spec, const BinMatrix& bins, std::span<const int> y01);

// Replaces every value with the WOE of its bin, column by column.
Matrix woe_encode(const Matrix& X, const std::vector<WoeTable>& tables);

nlohmann::json to_json(const WoeTable& t);
WoeTable woe_table_from_json(const nlohmann::json& j);

// Encrypted WOE for the passive party's features. The passive party holds the
// keys and its binned columns; the active party holds the labels.
struct WoeActiveInput {
  ckks::ContextPtr ctx;
  std::span<const int> y01;
};

struct WoePassiveInput {
  ckks::ContextPtr ctx;
  const ckks::KeySet* keys = nullptr;
  const Matrix* X = nullptr;
  std::size_t bins = 10;
};

struct WoeFheResult {
  std::vector<WoeTable> tables;
  // Rounded encrypted positive counts, bin columns of all features concatenated.
  std::vector<std::uint64_t> good_counts;
  // Largest distance of a decrypted count from its rounded value.
  double rounding_error = 0.0;
  simnet::Transcript transcript;
};

simnet::Task<> woe_fhe_active(simnet::PartyContext& net, const WoeActiveInput& in);
simnet::Task<> woe_fhe_passive(simnet::PartyContext& net, const WoePassiveInput& in, WoeFheResult& out);

WoeFheResult woe_fhe(std::span<const int> y01, const Matrix& XB, std::size_t bins, const ckks::ContextPtr& ctx,
                     const ckks::KeySet& keys, std::uint64_t seed);

}  // namespace fedfhe::preprocess
