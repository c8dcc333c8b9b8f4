#pragma once

// convenience umbrella for the whole library

#include <gectk/align.hpp>
#include <gectk/bootstrap.hpp>
#include <gectk/classify.hpp>
#include <gectk/commands.hpp>
#include <gectk/confusion.hpp>
#include <gectk/editdist.hpp>
#include <gectk/errors.hpp>
#include <gectk/learned_channel.hpp>
#include <gectk/log.hpp>
#include <gectk/m2.hpp>
#include <gectk/pipeline.hpp>
#include <gectk/prob_channel.hpp>
#include <gectk/remote.hpp>
#include <gectk/rng.hpp>
#include <gectk/score.hpp>
#include <gectk/text.hpp>
#include <gectk/unicode.hpp>
#include <gectk/version.hpp>
