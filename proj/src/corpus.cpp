#include "whosai/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "whosai/io.hpp"
#include "whosai/random.hpp"

namespace whosai
{

namespace
{

std::vector<std::string> sorted_distinct_labels(const std::vector<Document> &docs)
{
	std::set<std::string> labels;
	for (const auto &d : docs)
		labels.insert(d.label);
	return {labels.begin(), labels.end()};
}

} // namespace

Corpus::Corpus(std::vector<Document> docs)
    : docs_(std::move(docs))
{
	categories_ = sorted_distinct_labels(docs_);
	validate();
}

Corpus::Corpus(std::vector<Document> docs, std::vector<std::string> categories)
    : docs_(std::move(docs)), categories_(std::move(categories))
{
	validate();
}

void Corpus::validate() const
{
	std::unordered_set<std::string> ids;
	const std::set<std::string> cats(categories_.begin(), categories_.end());
	if (cats.size() != categories_.size())
		throw Error("duplicate category in category list");
	for (const auto &d : docs_)
	{
		if (d.id.empty())
			throw Error("document with empty id");
		if (d.text.empty())
			throw Error("document '" + d.id + "' has empty text");
		if (d.label.empty())
			throw Error("document '" + d.id + "' has empty label");
		if (!ids.insert(d.id).second)
			throw Error("duplicate document id '" + d.id + "'");
		if (!cats.count(d.label))
			throw Error("label '" + d.label + "' of document '" + d.id + "' is not a declared category");
	}
}

std::size_t Corpus::category_index(const std::string &label) const
{
	const auto it = std::find(categories_.begin(), categories_.end(), label);
	if (it == categories_.end())
		throw Error("unknown category '" + label + "'");
	return static_cast<std::size_t>(it - categories_.begin());
}

bool Corpus::has_category(const std::string &label) const
{
	return std::find(categories_.begin(), categories_.end(), label) != categories_.end();
}

std::vector<int> Corpus::label_ids() const
{
	std::map<std::string, int> index;
	for (std::size_t k = 0; k < categories_.size(); ++k)
		index[categories_[k]] = static_cast<int>(k);
	std::vector<int> out;
	out.reserve(docs_.size());
	for (const auto &d : docs_)
		out.push_back(index.at(d.label));
	return out;
}

std::vector<std::string> Corpus::labels() const
{
	std::vector<std::string> out;
	out.reserve(docs_.size());
	for (const auto &d : docs_)
		out.push_back(d.label);
	return out;
}

Corpus Corpus::filter_labels(const std::vector<std::string> &keep) const
{
	const std::set<std::string> wanted(keep.begin(), keep.end());
	std::vector<Document> docs;
	for (const auto &d : docs_)
		if (wanted.count(d.label))
			docs.push_back(d);
	return Corpus(std::move(docs));
}

// ---------------------------------------------------------------------------
// JSONL

Corpus load_jsonl(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error("cannot open corpus file " + path.string());

	std::vector<Document> docs;
	std::unordered_set<std::string> ids;
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line))
	{
		++line_no;
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (line.find_first_not_of(" \t") == std::string::npos)
			continue;

		nlohmann::json obj;
		try
		{
			obj = nlohmann::json::parse(line);
		}
		catch (const nlohmann::json::parse_error &e)
		{
			throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
		}
		Document doc;
		for (const char *field : {"id", "text", "label"})
		{
			if (!obj.is_object() || !obj.contains(field) || !obj[field].is_string())
				throw Error(path.string() + ":" + std::to_string(line_no) + ": missing string field '" + field + "'");
		}
		doc.id = obj["id"].get<std::string>();
		doc.text = obj["text"].get<std::string>();
		doc.label = obj["label"].get<std::string>();
		if (doc.id.empty() || doc.text.empty() || doc.label.empty())
			throw Error(path.string() + ":" + std::to_string(line_no) + ": empty id, text or label");
		if (!ids.insert(doc.id).second)
			throw Error(path.string() + ":" + std::to_string(line_no) + ": duplicate id '" + doc.id + "'");
		docs.push_back(std::move(doc));
	}
	if (docs.empty())
		throw Error("empty corpus: " + path.string());
	return Corpus(std::move(docs));
}

std::string to_jsonl(const Corpus &corpus)
{
	std::string out;
	for (const auto &d : corpus.docs())
	{
		nlohmann::ordered_json obj;
		obj["id"] = d.id;
		obj["text"] = d.text;
		obj["label"] = d.label;
		out += obj.dump();
		out += '\n';
	}
	return out;
}

void save_jsonl(const Corpus &corpus, const std::filesystem::path &path)
{
	write_file_atomic(path, to_jsonl(corpus));
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv(const std::string &text)
{
	std::vector<std::vector<std::string>> rows;
	std::vector<std::string> row;
	std::string field;
	bool in_quotes = false;
	bool field_started = false;

	auto end_field = [&] {
		row.push_back(std::move(field));
		field.clear();
		field_started = false;
	};
	auto end_row = [&] {
		end_field();
		if (!(row.size() == 1 && row[0].empty()))
			rows.push_back(std::move(row));
		row.clear();
	};

	for (std::size_t i = 0; i < text.size(); ++i)
	{
		const char c = text[i];
		if (in_quotes)
		{
			if (c == '"')
			{
				if (i + 1 < text.size() && text[i + 1] == '"')
				{
					field += '"';
					++i;
				}
				else
					in_quotes = false;
			}
			else
				field += c;
			continue;
		}
		if (c == '"' && !field_started)
		{
			in_quotes = true;
			field_started = true;
		}
		else if (c == ',')
			end_field();
		else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
			continue;
		else if (c == '\n')
			end_row();
		else
		{
			field += c;
			field_started = true;
		}
	}
	if (in_quotes)
		throw Error("unterminated quoted CSV field");
	if (field_started || !row.empty())
		end_row();
	return rows;
}

Corpus load_csv(const std::filesystem::path &path, const std::string &text_column,
                const std::string &label_column)
{
	const auto rows = parse_csv(read_file(path));
	if (rows.empty())
		throw Error("CSV file has no header row: " + path.string());
	const auto &header = rows.front();
	auto column = [&](const std::string &name) -> std::ptrdiff_t {
		const auto it = std::find(header.begin(), header.end(), name);
		return it == header.end() ? -1 : it - header.begin();
	};
	const auto text_col = column(text_column);
	const auto label_col = column(label_column);
	const auto id_col = column("id");
	if (text_col < 0)
		throw Error("CSV column '" + text_column + "' not found in " + path.string());
	if (label_col < 0)
		throw Error("CSV column '" + label_column + "' not found in " + path.string());

	std::vector<Document> docs;
	for (std::size_t r = 1; r < rows.size(); ++r)
	{
		const auto &row = rows[r];
		if (row.size() != header.size())
			throw Error("CSV row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
			            " fields, header has " + std::to_string(header.size()));
		Document d;
		d.id = id_col >= 0 ? row[id_col] : std::to_string(r - 1);
		d.text = row[text_col];
		d.label = row[label_col];
		docs.push_back(std::move(d));
	}
	if (docs.empty())
		throw Error("empty corpus: " + path.string());
	return Corpus(std::move(docs));
}

// ---------------------------------------------------------------------------
// Splitting and relabeling

std::tuple<Corpus, Corpus, Corpus> split(const Corpus &corpus, double train_frac, double val_frac,
                                         std::uint64_t seed)
{
	if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0))
		throw Error("split fractions must satisfy 0 < train, val and train + val < 1");

	const auto ids = corpus.label_ids();
	std::vector<std::vector<std::size_t>> members(corpus.num_categories());
	for (std::size_t i = 0; i < ids.size(); ++i)
		members[ids[i]].push_back(i);

	std::vector<int> assignment(corpus.size(), -1);
	for (std::size_t k = 0; k < members.size(); ++k)
	{
		auto idx = members[k];
		Rng rng(mix_seed(seed, k));
		rng.shuffle(idx);
		const auto n = idx.size();
		const auto n_train = static_cast<std::size_t>(std::llround(n * train_frac));
		const auto n_val = static_cast<std::size_t>(std::llround(n * val_frac));
		if (n_train < 1 || n_val < 1 || n_train + n_val >= n)
			throw Error("category '" + corpus.categories()[k] + "' has too few documents (" +
			            std::to_string(n) + ") to stratify");
		for (std::size_t j = 0; j < n; ++j)
			assignment[idx[j]] = j < n_train ? 0 : (j < n_train + n_val ? 1 : 2);
	}

	std::vector<Document> parts[3];
	for (std::size_t i = 0; i < corpus.size(); ++i)
		parts[assignment[i]].push_back(corpus.docs()[i]);
	return {Corpus(std::move(parts[0]), corpus.categories()),
	        Corpus(std::move(parts[1]), corpus.categories()),
	        Corpus(std::move(parts[2]), corpus.categories())};
}

Corpus relabel_binary(const Corpus &corpus, const std::string &human_label)
{
	if (!corpus.has_category(human_label))
		throw Error("label '" + human_label + "' not present in corpus");
	std::vector<Document> docs = corpus.docs();
	for (auto &d : docs)
		if (d.label != human_label)
			d.label = "AI";
	return Corpus(std::move(docs));
}

// ---------------------------------------------------------------------------
// Generator subsets

namespace
{

int size_rank(const std::string &word)
{
	static const std::vector<std::string> sizes = {"tiny", "small", "base", "medium", "large", "xl", "xxl", "mega"};
	const auto it = std::find(sizes.begin(), sizes.end(), word);
	return it == sizes.end() ? -1 : static_cast<int>(it - sizes.begin());
}

} // namespace

GeneratorSubset parse_generator_subset(const std::string &name)
{
	if (name == "all")
		return GeneratorSubset::all;
	if (name == "largest")
		return GeneratorSubset::largest;
	if (name == "smallest")
		return GeneratorSubset::smallest;
	throw Error("unknown generator subset '" + name + "' (expected all, largest or smallest)");
}

Corpus select_generator_subset(const Corpus &corpus, GeneratorSubset subset)
{
	if (subset == GeneratorSubset::all)
		return corpus;

	// family -> (rank, label) of the chosen variant
	std::map<std::string, std::pair<int, std::string>> chosen;
	std::vector<std::string> keep;
	for (const auto &label : corpus.categories())
	{
		const auto dash = label.rfind('-');
		const int rank = dash == std::string::npos ? -1 : size_rank(label.substr(dash + 1));
		if (rank < 0)
		{
			keep.push_back(label);
			continue;
		}
		const auto family = label.substr(0, dash);
		auto it = chosen.find(family);
		const bool better = it == chosen.end() ||
		                    (subset == GeneratorSubset::largest ? rank > it->second.first : rank < it->second.first);
		if (better)
			chosen[family] = {rank, label};
	}
	for (const auto &[family, pick] : chosen)
		keep.push_back(pick.second);
	return corpus.filter_labels(keep);
}

} // namespace whosai
