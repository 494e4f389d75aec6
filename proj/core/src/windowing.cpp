/*
 * Copyright 2026 The Cloudcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cloudcast/windowing.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"
#include "cloudcast/rng.hpp"

namespace cloudcast::data {

namespace {

std::vector<Eigen::Index> selected_columns(
    const std::vector<std::string>& resources, const ResourceSelector& sel) {
  if (sel.bivariate) {
    std::vector<Eigen::Index> cols(resources.size());
    for (std::size_t i = 0; i < resources.size(); ++i) {
      cols[i] = static_cast<Eigen::Index>(i);
    }
    return cols;
  }
  for (std::size_t i = 0; i < resources.size(); ++i) {
    if (resources[i] == sel.resource) {
      return {static_cast<Eigen::Index>(i)};
    }
  }
  throw ParameterError("selector resource '" + sel.resource +
                       "' not present in series");
}

void check_window_params(Eigen::Index total, int input_len, int horizon) {
  if (input_len < 1) throw ParameterError("input_len must be >= 1");
  if (horizon < 1) throw ParameterError("horizon_steps must be >= 1");
  if (total < input_len + horizon) {
    throw DataError("series too short: " + std::to_string(total) +
                    " points, need at least " +
                    std::to_string(input_len + horizon));
  }
}

}  // namespace

std::vector<WindowSample> make_windows(const trace::TraceSeries& scaled,
                                       int input_len, int horizon_steps,
                                       const ResourceSelector& selector) {
  check_window_params(scaled.size(), input_len, horizon_steps);
  const auto cols = selected_columns(scaled.resources, selector);
  const auto n_samples = scaled.size() - input_len - horizon_steps + 1;

  std::vector<WindowSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    WindowSample s;
    s.cluster_id = scaled.cluster_id;
    s.input.resize(input_len, static_cast<Eigen::Index>(cols.size()));
    s.target.resize(static_cast<Eigen::Index>(cols.size()));
    const Eigen::Index target_row = i + input_len + horizon_steps - 1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      s.input.col(static_cast<Eigen::Index>(c)) =
          scaled.values.col(cols[c]).segment(i, input_len);
      s.target(static_cast<Eigen::Index>(c)) =
          scaled.values(target_row, cols[c]);
    }
    s.target_index = target_row;
    out.push_back(std::move(s));
  }
  return out;
}

WindowSample SplitBundle::materialize(const SampleRef& ref) const {
  WindowSample s;
  s.cluster_id = cluster_id;
  s.input = series.middleRows(ref.start, input_len);
  s.target = series.row(ref.target).transpose();
  s.target_index = ref.target;
  return s;
}

Eigen::MatrixXd SplitBundle::targets(const std::vector<SampleRef>& refs) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(refs.size()), series.cols());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = series.row(refs[i].target);
  }
  return out;
}

SplitBundle split(const trace::TraceSeries& raw,
                  const ResourceSelector& selector, int input_len,
                  int horizon_steps, double train_fraction,
                  double val_fraction) {
  check_window_params(raw.size(), input_len, horizon_steps);
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw ParameterError("train_fraction must be in (0, 1)");
  }
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw ParameterError("val_fraction must be in [0, 1)");
  }

  const auto cols = selected_columns(raw.resources, selector);

  // Scaler is fitted per cluster and per resource on the training portion
  // of the full series, before any column selection.
  const MinMaxScaler full_scaler = MinMaxScaler::fit(raw, train_fraction);

  SplitBundle bundle;
  bundle.cluster_id = raw.cluster_id;
  bundle.input_len = input_len;
  bundle.horizon_steps = horizon_steps;

  Eigen::VectorXd lo(static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd hi(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    bundle.resources.push_back(raw.resources[static_cast<std::size_t>(cols[c])]);
    lo(static_cast<Eigen::Index>(c)) = full_scaler.min()(cols[c]);
    hi(static_cast<Eigen::Index>(c)) = full_scaler.max()(cols[c]);
  }
  bundle.scaler = MinMaxScaler(bundle.resources, std::move(lo), std::move(hi));

  Eigen::MatrixXd selected(raw.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    selected.col(static_cast<Eigen::Index>(c)) = raw.values.col(cols[c]);
  }
  bundle.series = bundle.scaler.transform(selected);

  const auto total = raw.size();
  const auto train_end = static_cast<std::int64_t>(
      std::floor(train_fraction * static_cast<double>(total)));
  bundle.train_end = train_end;
  bundle.test_start = train_end;

  // Window with target row `start + input_len + horizon - 1`:
  //   training region when the target lands before train_end,
  //   test region when the whole window lies at or after train_end.
  // Windows straddling the cut are dropped: their target is test-region
  // information, and test inputs must not reach back into training rows.
  std::vector<SampleRef> train_val;
  const Eigen::Index n_samples = total - input_len - horizon_steps + 1;
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    const auto target = static_cast<std::int32_t>(i + input_len + horizon_steps - 1);
    SampleRef ref{static_cast<std::int32_t>(i), target};
    if (target < train_end) {
      train_val.push_back(ref);
    } else if (i >= train_end) {
      bundle.test.push_back(ref);
    }
  }
  if (train_val.empty()) throw DataError("no training samples after split");
  if (bundle.test.empty()) throw DataError("no test samples after split");

  const auto n_val = static_cast<std::size_t>(
      std::floor(val_fraction * static_cast<double>(train_val.size())));
  const std::size_t n_train = train_val.size() - n_val;
  if (n_train == 0) throw DataError("no training samples after val split");
  bundle.train.assign(train_val.begin(),
                      train_val.begin() + static_cast<std::ptrdiff_t>(n_train));
  bundle.val.assign(train_val.begin() + static_cast<std::ptrdiff_t>(n_train),
                    train_val.end());
  return bundle;
}

TrainStream merge_shuffle(const std::vector<const SplitBundle*>& bundles,
                          std::uint64_t seed) {
  if (bundles.empty()) throw ParameterError("no bundles to merge");
  TrainStream stream;
  stream.input_len = bundles.front()->input_len;
  stream.horizon_steps = bundles.front()->horizon_steps;
  stream.resource_count = bundles.front()->resource_count();

  for (const auto* bundle : bundles) {
    if (bundle->resource_count() != stream.resource_count) {
      throw ParameterError("cannot merge bundles with mixed resource counts");
    }
    if (bundle->input_len != stream.input_len ||
        bundle->horizon_steps != stream.horizon_steps) {
      throw ParameterError("cannot merge bundles with mixed window shapes");
    }
    for (const auto& ref : bundle->train) stream.train.push_back({bundle, ref});
    for (const auto& ref : bundle->val) stream.val.push_back({bundle, ref});
  }

  rng::PortableRng gen(rng::derive_seed(seed, /*stream=*/17));
  gen.shuffle(stream.train);
  return stream;
}

TrainStream to_stream(const SplitBundle& bundle, std::uint64_t seed) {
  return merge_shuffle({&bundle}, seed);
}

namespace {

void write_matrix_bin(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

Eigen::MatrixXd read_matrix_bin(const std::filesystem::path& path,
                                Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(i, j) = v;
    }
  }
  if (!in) throw ArtifactError("short read in " + path.string());
  return m;
}

void write_samples(const SplitBundle& bundle,
                   const std::vector<SampleRef>& refs,
                   const std::filesystem::path& bin_path,
                   const std::filesystem::path& index_path) {
  const Eigen::Index r = bundle.resource_count();
  const Eigen::Index row_len = bundle.input_len * r + r;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(refs.size()), row_len);
  std::ofstream index(index_path);
  if (!index) throw ArtifactError("cannot write " + index_path.string());
  index << "cluster_id,target_index\n";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto sample = bundle.materialize(refs[i]);
    Eigen::Index k = 0;
    for (Eigen::Index t = 0; t < sample.input.rows(); ++t) {
      for (Eigen::Index c = 0; c < r; ++c) {
        rows(static_cast<Eigen::Index>(i), k++) = sample.input(t, c);
      }
    }
    for (Eigen::Index c = 0; c < r; ++c) {
      rows(static_cast<Eigen::Index>(i), k++) = sample.target(c);
    }
    index << bundle.cluster_id << ',' << sample.target_index << '\n';
  }
  write_matrix_bin(bin_path, rows);
}

}  // namespace

void save_bundle(const SplitBundle& bundle, const std::filesystem::path& dir,
                 std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  bundle.scaler.save(dir / "scaler.json");

  nlohmann::json meta;
  meta["cluster_id"] = bundle.cluster_id;
  meta["resources"] = bundle.resources;
  meta["input_len"] = bundle.input_len;
  meta["horizon_steps"] = bundle.horizon_steps;
  meta["seed"] = seed;
  meta["series_rows"] = bundle.series.rows();
  meta["train_end"] = bundle.train_end;
  meta["test_start"] = bundle.test_start;
  meta["counts"] = {{"train", bundle.train.size()},
                    {"val", bundle.val.size()},
                    {"test", bundle.test.size()}};
  std::ofstream meta_out(dir / "meta.json");
  if (!meta_out) throw ArtifactError("cannot write bundle meta");
  meta_out << meta.dump(2) << '\n';

  write_matrix_bin(dir / "series.bin", bundle.series);
  write_samples(bundle, bundle.train, dir / "train.bin", dir / "train_index.csv");
  write_samples(bundle, bundle.val, dir / "val.bin", dir / "val_index.csv");
  write_samples(bundle, bundle.test, dir / "test.bin", dir / "test_index.csv");
}

SplitBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw ArtifactError("not a bundle directory: " + dir.string());
  nlohmann::json meta;
  meta_in >> meta;

  SplitBundle bundle;
  bundle.cluster_id = meta.at("cluster_id").get<std::string>();
  bundle.resources = meta.at("resources").get<std::vector<std::string>>();
  bundle.input_len = meta.at("input_len").get<int>();
  bundle.horizon_steps = meta.at("horizon_steps").get<int>();
  bundle.train_end = meta.at("train_end").get<std::int64_t>();
  bundle.test_start = meta.at("test_start").get<std::int64_t>();
  bundle.scaler = MinMaxScaler::load(dir / "scaler.json");

  const auto rows = meta.at("series_rows").get<Eigen::Index>();
  bundle.series = read_matrix_bin(
      dir / "series.bin", rows,
      static_cast<Eigen::Index>(bundle.resources.size()));

  auto read_index = [&](const std::string& name,
                        std::vector<SampleRef>& refs) {
    std::ifstream in(dir / name);
    if (!in) throw ArtifactError("missing " + name + " in " + dir.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = csv::split_line(line);
      const auto target = static_cast<std::int32_t>(csv::parse_int(fields.at(1)));
      refs.push_back({static_cast<std::int32_t>(
                          target - bundle.input_len - bundle.horizon_steps + 1),
                      target});
    }
  };
  read_index("train_index.csv", bundle.train);
  read_index("val_index.csv", bundle.val);
  read_index("test_index.csv", bundle.test);

  const auto& counts = meta.at("counts");
  if (bundle.train.size() != counts.at("train").get<std::size_t>() ||
      bundle.val.size() != counts.at("val").get<std::size_t>() ||
      bundle.test.size() != counts.at("test").get<std::size_t>()) {
    throw ArtifactError("bundle sample counts do not match meta.json");
  }
  return bundle;
}

}  // namespace cloudcast::data
