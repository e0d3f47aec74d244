#pragma once

// Umbrella header for the SA-Mem library. The HTTP annotation client lives in
// samem/http_annotator.hpp and is not pulled in here (it drags in a full HTTP
// stack); include it explicitly where needed.

#include "samem/ablation.hpp"
#include "samem/action_parse.hpp"
#include "samem/actions.hpp"
#include "samem/compression.hpp"
#include "samem/cot_forge.hpp"
#include "samem/embedding.hpp"
#include "samem/error.hpp"
#include "samem/maintenance.hpp"
#include "samem/memory.hpp"
#include "samem/nav.hpp"
#include "samem/oracle.hpp"
#include "samem/replay.hpp"
#include "samem/rng.hpp"
#include "samem/trace.hpp"
#include "samem/version.hpp"
