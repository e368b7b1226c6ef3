#include "nbe2e/asr/vocab.hpp"

#include <sstream>
#include <stdexcept>

namespace nbe2e::asr {

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  tokens_ = {"<blank>", "<sos>", "<eos>", "<pad>"};
  tokens_.insert(tokens_.end(), words.begin(), words.end());
  for (int i = 0; i < size(); ++i)
    if (!index_.emplace(tokens_[i], i).second) throw std::invalid_argument("duplicate token '" + tokens_[i] + "'");
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw std::invalid_argument("token '" + token + "' not in vocabulary");
  return it->second;
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<int> Vocabulary::encode(const std::string& transcript) const {
  std::vector<int> ids;
  for (const auto& w : split_words(transcript)) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (is_special(i)) continue;
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

}  // namespace nbe2e::asr
