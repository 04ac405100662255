#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "whosai/types.hpp"

namespace whosai
{

struct Document
{
	std::string id;
	std::string text;
	std::string label;

	bool operator==(const Document &) const = default;
};

// Immutable labeled collection. Categories are kept in lexicographic order
// unless a caller supplies an explicit order.
class Corpus
{
public:
	Corpus() = default;
	explicit Corpus(std::vector<Document> docs);
	Corpus(std::vector<Document> docs, std::vector<std::string> categories);

	const std::vector<Document> &docs() const { return docs_; }
	const std::vector<std::string> &categories() const { return categories_; }
	std::size_t size() const { return docs_.size(); }
	std::size_t num_categories() const { return categories_.size(); }

	/// Index of a label in categories(); throws if absent.
	std::size_t category_index(const std::string &label) const;
	bool has_category(const std::string &label) const;

	/// Category index of every document, in document order.
	std::vector<int> label_ids() const;
	std::vector<std::string> labels() const;

	/// Documents whose label is in `keep`, order preserved.
	Corpus filter_labels(const std::vector<std::string> &keep) const;

	bool operator==(const Corpus &) const = default;

private:
	void validate() const;

	std::vector<Document> docs_;
	std::vector<std::string> categories_;
};

Corpus load_jsonl(const std::filesystem::path &path);
void save_jsonl(const Corpus &corpus, const std::filesystem::path &path);
std::string to_jsonl(const Corpus &corpus);

/// RFC-4180 CSV with a header row. If the header has an `id` column it is
/// used; otherwise ids are the zero-based data-row index.
Corpus load_csv(const std::filesystem::path &path, const std::string &text_column,
                const std::string &label_column);

/// Parse CSV text into rows of fields (RFC-4180 quoting).
std::vector<std::vector<std::string>> parse_csv(const std::string &text);

struct SynthSpec
{
	std::size_t n_generators = 5;
	std::size_t docs_per_class = 400;
	/// Plain-text seed file. Empty means the built-in seed text.
	std::filesystem::path human_source;
	std::vector<int> generator_orders;
	std::vector<double> generator_temperatures;
	/// Target length of each document, in whitespace tokens.
	std::size_t doc_length = 120;
};

/// Fill per-generator orders/temperatures with the built-in schedule when
/// they are left empty.
SynthSpec with_default_generators(SynthSpec spec);

/// Built-in human seed text used when no source file is given.
const std::string &builtin_human_text();

Corpus synth_corpus(const SynthSpec &spec, std::uint64_t seed);
Corpus synth_corpus_from_text(const SynthSpec &spec, const std::string &human_text,
                              std::uint64_t seed);

/// Stratified three-way split: train, validation, test.
std::tuple<Corpus, Corpus, Corpus> split(const Corpus &corpus, double train_frac,
                                         double val_frac, std::uint64_t seed);

/// Turing-test view: every label except `human_label` becomes "AI".
Corpus relabel_binary(const Corpus &corpus, const std::string &human_label);

enum class GeneratorSubset
{
	all,
	largest,
	smallest
};

GeneratorSubset parse_generator_subset(const std::string &name);

/// Keep, for each generator family, only its largest or smallest size
/// variant. A label `family-size` carries a size when its last `-`
/// separated part is one of the known size words (see README).
Corpus select_generator_subset(const Corpus &corpus, GeneratorSubset subset);

} // namespace whosai
