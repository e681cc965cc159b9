#pragma once

#include "narrative_net/error.hpp"
#include "narrative_net/utf8.hpp"
#include "narrative_net/text_util.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/speaker_attribution.hpp"
#include "narrative_net/augmentation.hpp"
#include "narrative_net/attributor_adapter.hpp"
#include "narrative_net/social_graph.hpp"
#include "narrative_net/graph_io.hpp"
#include "narrative_net/graph_metrics.hpp"
#include "narrative_net/sentiment.hpp"
#include "narrative_net/pipeline.hpp"
#include "narrative_net/annotation_service.hpp"
