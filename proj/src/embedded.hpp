#pragma once

// Data files compiled into the library (generated from data/).
namespace nlchart::embedded {

extern const char* const kCatalog;
extern const char* const kRules;
extern const char* const kTemplates;
extern const char* const kPhrases;
extern const char* const kCarSales;

}  // namespace nlchart::embedded
