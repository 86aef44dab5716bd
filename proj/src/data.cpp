#include "data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace mlcl {

std::vector<std::size_t> Dataset::label_counts() const {
  std::vector<std::size_t> counts(num_labels(), 0);
  for (const Example& ex : examples) {
    for (std::size_t j : ex.labels.active()) counts[j]++;
  }
  return counts;
}

namespace {

std::vector<std::string> whitespace_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

Dataset encode_records(const std::vector<RawRecord>& records, Dataset skeleton,
                       bool extend_spaces) {
  std::unordered_map<std::string, std::size_t> label_ids;
  for (std::size_t j = 0; j < skeleton.label_names.size(); ++j) {
    label_ids[skeleton.label_names[j]] = j;
  }

  if (extend_spaces) {
    for (const RawRecord& rec : records) {
      for (const std::string& tok : rec.tokens) {
        if (skeleton.token_ids.emplace(tok, skeleton.vocab.size()).second) {
          skeleton.vocab.push_back(tok);
        }
      }
      for (const std::string& name : rec.labels) {
        if (label_ids.emplace(name, skeleton.label_names.size()).second) {
          skeleton.label_names.push_back(name);
        }
      }
    }
  }

  const std::size_t l = skeleton.label_names.size();
  skeleton.examples.reserve(records.size());
  for (const RawRecord& rec : records) {
    Example ex;
    ex.tokens.reserve(rec.tokens.size());
    for (const std::string& tok : rec.tokens) {
      const auto it = skeleton.token_ids.find(tok);
      ex.tokens.push_back(it == skeleton.token_ids.end() ? kUnkTokenId : it->second);
    }
    ex.labels = LabelSet(l);
    for (const std::string& name : rec.labels) {
      const auto it = label_ids.find(name);
      if (it == label_ids.end()) {
        fail(ErrorCode::kInvalidArgument, "label '" + name + "' absent from the label space");
      }
      ex.labels.set(it->second);
    }
    if (!ex.labels.any()) fail(ErrorCode::kInvalidArgument, "example without labels");
    skeleton.examples.push_back(std::move(ex));
  }
  return skeleton;
}

Dataset empty_skeleton() {
  Dataset d;
  d.vocab.push_back("<unk>");
  d.token_ids.emplace("<unk>", kUnkTokenId);
  return d;
}

}  // namespace

Dataset build_dataset(const std::vector<RawRecord>& records) {
  return encode_records(records, empty_skeleton(), /*extend_spaces=*/true);
}

Dataset encode_with(const Dataset& reference, const std::vector<RawRecord>& records) {
  Dataset skeleton = empty_skeleton();
  skeleton.label_names = reference.label_names;
  skeleton.vocab = reference.vocab;
  skeleton.token_ids = reference.token_ids;
  return encode_records(records, std::move(skeleton), /*extend_spaces=*/false);
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "cannot open dataset file: " + path);
  std::vector<RawRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ", line " + std::to_string(lineno);
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      fail(ErrorCode::kParse, where + ": malformed record");
    }
    if (!rec.contains("text") || !rec["text"].is_string()) {
      fail(ErrorCode::kParse, where + ": missing string field \"text\"");
    }
    if (!rec.contains("labels") || !rec["labels"].is_array() || rec["labels"].empty()) {
      fail(ErrorCode::kParse, where + ": missing non-empty array field \"labels\"");
    }
    RawRecord raw;
    raw.tokens = whitespace_tokenize(rec["text"].get<std::string>());
    if (raw.tokens.empty()) fail(ErrorCode::kParse, where + ": empty text");
    for (const auto& name : rec["labels"]) {
      if (!name.is_string()) fail(ErrorCode::kParse, where + ": labels must be strings");
      raw.labels.push_back(name.get<std::string>());
    }
    records.push_back(std::move(raw));
  }
  return build_dataset(records);
}

std::vector<RawRecord> to_records(const Dataset& dataset) {
  std::vector<RawRecord> records;
  records.reserve(dataset.size());
  for (const Example& ex : dataset.examples) {
    RawRecord rec;
    rec.tokens.reserve(ex.tokens.size());
    for (auto id : ex.tokens) rec.tokens.push_back(dataset.vocab[id]);
    for (std::size_t j : ex.labels.active()) rec.labels.push_back(dataset.label_names[j]);
    records.push_back(std::move(rec));
  }
  return records;
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot write dataset file: " + path);
  for (const RawRecord& rec : to_records(dataset)) {
    std::string text;
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
      if (i) text += ' ';
      text += rec.tokens[i];
    }
    nlohmann::json j;
    j["text"] = text;
    j["labels"] = rec.labels;
    os << j.dump() << "\n";
  }
  if (!os) fail(ErrorCode::kIo, "short write to dataset file: " + path);
}

SyntheticConfig SyntheticConfig::from_config(const Config& cfg) {
  SyntheticConfig out;
  out.n_labels = cfg.get_uint("n_labels", 0);
  out.vocab_size = cfg.get_uint("vocab_size", 0);
  out.n_examples = cfg.get_uint("n_examples", 0);
  out.tokens_per_example = cfg.get_uint("tokens_per_example", 0);
  out.multi_label_rate = cfg.get_real("multi_label_rate", 0.0);
  out.seed = cfg.get_uint("seed", 0);

  const std::size_t l = out.n_labels;
  const std::string raw = cfg.get_string("cooccurrence", "0.25");
  out.cooccurrence.assign(l * l, 0.0);
  if (raw.find(';') == std::string::npos && raw.find(',') == std::string::npos) {
    char* end = nullptr;
    const double off = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0') {
      fail(ErrorCode::kParse, "field cooccurrence: not a number: '" + raw + "'");
    }
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < l; ++j) out.cooccurrence[i * l + j] = i == j ? 1.0 : off;
    }
  } else {
    std::istringstream rows(raw);
    std::string row;
    std::size_t i = 0;
    while (std::getline(rows, row, ';')) {
      std::istringstream cells(row);
      std::string cell;
      std::size_t j = 0;
      while (std::getline(cells, cell, ',')) {
        if (i >= l || j >= l) fail(ErrorCode::kParse, "field cooccurrence: too many entries");
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) fail(ErrorCode::kParse, "field cooccurrence: bad entry '" + cell + "'");
        out.cooccurrence[i * l + j] = v;
        ++j;
      }
      if (j != l) fail(ErrorCode::kParse, "field cooccurrence: row " + std::to_string(i) + " has wrong width");
      ++i;
    }
    if (i != l) fail(ErrorCode::kParse, "field cooccurrence: expected " + std::to_string(l) + " rows");
  }
  out.validate();
  return out;
}

void SyntheticConfig::validate() const {
  if (n_labels == 0) fail(ErrorCode::kInvalidArgument, "field n_labels: must be at least 1");
  if (vocab_size < n_labels) {
    fail(ErrorCode::kInvalidArgument, "field vocab_size: need at least one token per label");
  }
  if (n_examples == 0) fail(ErrorCode::kInvalidArgument, "field n_examples: must be at least 1");
  if (tokens_per_example == 0) {
    fail(ErrorCode::kInvalidArgument, "field tokens_per_example: must be at least 1");
  }
  if (!(multi_label_rate >= 0.0 && multi_label_rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "field multi_label_rate: must be in [0, 1]");
  }
  if (cooccurrence.size() != n_labels * n_labels) {
    fail(ErrorCode::kInvalidArgument, "field cooccurrence: must be n_labels x n_labels");
  }
  for (std::size_t i = 0; i < n_labels; ++i) {
    if (cooccurrence[i * n_labels + i] != 1.0) {
      fail(ErrorCode::kInvalidArgument, "field cooccurrence: diagonal must be 1");
    }
    for (std::size_t j = 0; j < n_labels; ++j) {
      const double v = cooccurrence[i * n_labels + j];
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::kInvalidArgument, "field cooccurrence: probabilities must be in [0, 1]");
      }
      if (v != cooccurrence[j * n_labels + i]) {
        fail(ErrorCode::kInvalidArgument, "field cooccurrence: matrix must be symmetric");
      }
    }
  }
}

double SyntheticConfig::cooccurrence_at(std::size_t i, std::size_t j) const {
  return cooccurrence[i * n_labels + j];
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t l = cfg.n_labels;

  // Token partition: token t belongs to label t % l.
  std::vector<std::vector<std::size_t>> partition(l);
  for (std::size_t t = 0; t < cfg.vocab_size; ++t) partition[t % l].push_back(t);

  Rng rng(cfg.seed);
  std::vector<RawRecord> records;
  records.reserve(cfg.n_examples);
  for (std::size_t n = 0; n < cfg.n_examples; ++n) {
    const std::size_t primary = rng.below(l);
    std::vector<std::size_t> active{primary};
    if (rng.bernoulli(cfg.multi_label_rate)) {
      for (std::size_t j = 0; j < l; ++j) {
        if (j != primary && rng.bernoulli(cfg.cooccurrence_at(primary, j))) active.push_back(j);
      }
    }
    std::sort(active.begin(), active.end());

    RawRecord rec;
    rec.tokens.reserve(cfg.tokens_per_example);
    for (std::size_t t = 0; t < cfg.tokens_per_example; ++t) {
      const std::size_t label = active[rng.below(active.size())];
      const std::size_t token = partition[label][rng.below(partition[label].size())];
      rec.tokens.push_back("w" + std::to_string(token));
    }
    for (std::size_t j : active) rec.labels.push_back("label_" + std::to_string(j));
    records.push_back(std::move(rec));
  }
  return build_dataset(records);
}

Splits split_dataset(const Dataset& dataset, std::uint64_t seed, std::size_t n_train,
                     std::size_t n_valid) {
  if (n_train + n_valid > dataset.size() || n_train == 0) {
    fail(ErrorCode::kInvalidArgument, "split sizes exceed the dataset");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const std::vector<RawRecord> records = to_records(dataset);
  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<RawRecord> out;
    out.reserve(count);
    for (std::size_t i = from; i < from + count; ++i) out.push_back(records[order[i]]);
    return out;
  };

  Splits splits;
  splits.train = build_dataset(take(0, n_train));
  splits.valid = encode_with(splits.train, take(n_train, n_valid));
  splits.test = encode_with(splits.train, take(n_train + n_valid, dataset.size() - n_train - n_valid));
  return splits;
}

Splits split_dataset(const Dataset& dataset, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  const std::size_t n_train = n * 7 / 10;
  const std::size_t n_valid = n / 10;
  return split_dataset(dataset, seed, n_train, n_valid);
}

std::vector<std::vector<std::size_t>> batch_iterator(std::size_t n, std::size_t batch_size,
                                                     std::uint64_t seed, bool shuffle) {
  if (batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch_size must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t from = 0; from < n; from += batch_size) {
    const std::size_t to = std::min(n, from + batch_size);
    groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(from),
                        order.begin() + static_cast<std::ptrdiff_t>(to));
  }
  return groups;
}

}  // namespace mlcl
