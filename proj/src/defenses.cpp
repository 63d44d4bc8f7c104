#include "ragjam/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ragjam/error.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

double perplexity(Gateway& gateway, LlmRole role, const std::string& text) {
    if (text.empty())
        throw Error(ErrorCode::empty_input, "cannot compute perplexity of empty text");
    const std::vector<TokenScore> scores = gateway.score_tokens(role, text);
    if (scores.empty())
        throw Error(ErrorCode::empty_input, "scorer returned no tokens");
    double sum = 0.0;
    for (const auto& s : scores) sum += s.logprob;
    return std::exp(-sum / static_cast<double>(scores.size()));
}

RocResult roc_auc(const std::vector<double>& clean,
                  const std::vector<double>& adversarial) {
    if (clean.empty() || adversarial.empty())
        throw Error(ErrorCode::empty_input, "roc_auc needs both score lists");

    // Rank statistic: P(adv > clean) + P(adv == clean)/2, by exact pairwise
    // enumeration. Desk-scale lists make the O(n*m) cost irrelevant and the
    // result exact.
    std::int64_t wins = 0, ties = 0;
    for (double a : adversarial) {
        for (double c : clean) {
            if (a > c) ++wins;
            else if (a == c) ++ties;
        }
    }
    RocResult out;
    out.auc = (2.0 * static_cast<double>(wins) + static_cast<double>(ties)) /
              (2.0 * static_cast<double>(adversarial.size()) *
               static_cast<double>(clean.size()));

    // Curve points for plotting: sweep the decision threshold from strictest
    // to loosest over the distinct scores.
    std::vector<double> thresholds;
    thresholds.reserve(clean.size() + adversarial.size());
    thresholds.insert(thresholds.end(), clean.begin(), clean.end());
    thresholds.insert(thresholds.end(), adversarial.begin(), adversarial.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    out.points.emplace_back(0.0, 0.0);
    for (double t : thresholds) {
        const auto fp = static_cast<double>(std::count_if(
            clean.begin(), clean.end(), [&](double c) { return c >= t; }));
        const auto tp = static_cast<double>(std::count_if(
            adversarial.begin(), adversarial.end(), [&](double a) { return a >= t; }));
        out.points.emplace_back(fp / static_cast<double>(clean.size()),
                                tp / static_cast<double>(adversarial.size()));
    }
    return out;
}

std::vector<PerplexityRecord> perplexity_records(
    Gateway& gateway, LlmRole role, const std::vector<Document>& docs) {
    std::vector<PerplexityRecord> out;
    std::set<std::string> seen_texts;  // duplicates would double-count a doc
    for (const auto& doc : docs) {
        if (!seen_texts.insert(doc.text).second) continue;
        out.push_back({doc.id, doc.provenance, perplexity(gateway, role, doc.text)});
    }
    return out;
}

std::vector<Query> paraphrase_queries(Gateway& gateway, const Query& query, int n) {
    if (n <= 0)
        throw Error(ErrorCode::precondition_violation,
                    "paraphrase count must be positive");
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::paraphrase(query.text, n);
    req.temperature = 0.7;
    req.max_tokens = 512;
    const std::string reply = gateway.complete(req).text;

    std::vector<Query> out;
    std::string line;
    std::istringstream stream(reply);
    while (std::getline(stream, line) && out.size() < static_cast<std::size_t>(n)) {
        const std::string text = trim(line);
        if (text.empty()) continue;
        Query q;
        q.id = query.id + "#para" + std::to_string(out.size() + 1);
        q.text = text;
        q.gold_answer = query.gold_answer;
        out.push_back(std::move(q));
    }
    if (out.empty())
        throw Error(ErrorCode::generation_failure,
                    "paraphraser returned no usable lines");
    return out;
}

}  // namespace ragjam
