#include "medrag/text.hpp"

namespace medrag {

namespace {

// Classic English stopword list (NLTK's 179-word set).
const char* const kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
    "you're", "you've", "you'll", "you'd", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
    "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom",
    "this", "that", "that'll", "these", "those", "am", "is", "are", "was",
    "were", "be", "been", "being", "have", "has", "had", "having", "do",
    "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with",
    "about", "against", "between", "into", "through", "during", "before",
    "after", "above", "below", "to", "from", "up", "down", "in", "out",
    "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both",
    "each", "few", "more", "most", "other", "some", "such", "no", "nor",
    "not", "only", "own", "same", "so", "than", "too", "very", "s", "t",
    "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't",
    "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn",
    "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't", "ma",
    "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't",
    "won", "won't", "wouldn", "wouldn't",
};

// General clinical vocabulary that carries little specificity on its own.
// Query terms in this list are the first to be dropped when a Boolean
// ladder level relaxes; anatomical terms and disease names stay out so
// they survive relaxation.
const char* const kGeneralMedical[] = {
    "symptom", "symptoms", "sign", "signs", "treatment", "treatments",
    "treat", "treated", "therapy", "therapies", "therapeutic", "patient",
    "patients", "disease", "diseases", "disorder", "disorders",
    "condition", "conditions", "diagnosis", "diagnoses", "diagnostic",
    "diagnosed", "prognosis", "cause", "causes", "caused", "effect",
    "effects", "side-effect", "side-effects", "risk", "risks", "factor",
    "factors", "prevention", "prevent", "management", "managing", "care",
    "clinical", "medical", "medicine", "medication", "medications",
    "drug", "drugs", "dose", "doses", "dosage", "doctor", "doctors",
    "physician", "physicians", "hospital", "hospitals", "health",
    "healthcare", "test", "tests", "testing", "screening", "exam",
    "examination", "procedure", "procedures", "surgery", "surgical",
    "operation", "outcome", "outcomes", "recovery", "relapse", "chronic",
    "acute", "severe", "severity", "common", "rare", "normal", "abnormal",
    "syndrome", "infection", "infections", "inflammation", "pain",
    "fever", "study", "studies", "trial", "trials", "research",
    "evidence", "guideline", "guidelines", "history", "stage", "stages",
    "grade", "level", "levels", "rate", "rates", "types", "type",
};

// Lowercased tokens (with their trailing period) that do not terminate a
// sentence. Initials like "E. coli" need no entry: the next word is
// lowercase, which already blocks the boundary.
const char* const kAbbreviations[] = {
    "e.g.", "i.e.", "etc.", "et.", "al.", "cf.", "vs.", "viz.", "ca.",
    "approx.", "fig.", "figs.", "eq.", "eqs.", "ref.", "refs.", "no.",
    "nos.", "vol.", "vols.", "ch.", "sec.", "min.", "max.", "dr.", "mr.",
    "mrs.", "ms.", "prof.", "st.", "jr.", "sr.", "dept.",
};

template <std::size_t N>
std::unordered_set<std::string> make_set(const char* const (&words)[N]) {
    std::unordered_set<std::string> s;
    s.reserve(N);
    for (const char* w : words) s.insert(w);
    return s;
}

}  // namespace

const std::unordered_set<std::string>& english_stopwords() {
    static const auto set = make_set(kStopwords);
    return set;
}

const std::unordered_set<std::string>& general_medical_words() {
    static const auto set = make_set(kGeneralMedical);
    return set;
}

const std::unordered_set<std::string>& sentence_abbreviations() {
    static const auto set = make_set(kAbbreviations);
    return set;
}

}  // namespace medrag
