#ifndef TCOREF_TCOREF_HPP
#define TCOREF_TCOREF_HPP

#include "tcoref/context_graph.hpp"
#include "tcoref/coref.hpp"
#include "tcoref/corpus.hpp"
#include "tcoref/eval.hpp"
#include "tcoref/extraction.hpp"
#include "tcoref/kb.hpp"
#include "tcoref/kb_http.hpp"
#include "tcoref/pipeline.hpp"
#include "tcoref/porter.hpp"
#include "tcoref/postfilter.hpp"
#include "tcoref/reduction.hpp"
#include "tcoref/semantic.hpp"
#include "tcoref/stopwords.hpp"
#include "tcoref/term.hpp"
#include "tcoref/text.hpp"

#endif  // TCOREF_TCOREF_HPP
