// Copyright 2026 The tokenlens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "tokenlens/align.hpp"
#include "tokenlens/bpe.hpp"
#include "tokenlens/bpe_train.hpp"
#include "tokenlens/builtins.hpp"
#include "tokenlens/corpus.hpp"
#include "tokenlens/error.hpp"
#include "tokenlens/io.hpp"
#include "tokenlens/loss.hpp"
#include "tokenlens/ngram.hpp"
#include "tokenlens/parallel.hpp"
#include "tokenlens/report.hpp"
#include "tokenlens/scorer.hpp"
#include "tokenlens/stats.hpp"
#include "tokenlens/syntax/command_provider.hpp"
#include "tokenlens/syntax/python_parser.hpp"
#include "tokenlens/syntax/queries.hpp"
#include "tokenlens/tags.hpp"
#include "tokenlens/utf8.hpp"
#include "tokenlens/welford.hpp"
