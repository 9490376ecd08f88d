#pragma once

// JSON forms of measures, functions and reports, plus file helpers.
//
// Measure: {"d": 2, "m": 8, "cells": [{"idx": [3, 5], "mass": 0.25}, ...]}
// PL function: {"a": 0, "b": 1, "values": [...]}  (G = len(values) - 1)

#include <string>

#include "frostlab/entropy.hpp"
#include "frostlab/liplib.hpp"
#include "frostlab/multiscale.hpp"
#include "frostlab/plates.hpp"
#include "frostlab/proj.hpp"
#include "frostlab/regular.hpp"
#include "frostlab/xlab.hpp"

namespace frostlab {

Json MeasureToJson(const DyadicMeasure& mu);
// kParseError on malformed input; masses must be finite and non-negative.
DyadicMeasure MeasureFromJson(const Json& j);

Json PLFunctionToJson(const PLFunction& f);
PLFunction PLFunctionFromJson(const Json& j);

Json ToJson(const IntervalDecomposition& dec);
Json ToJson(const SuperlinearResult& r);
// Pieces carry sigma, T, mass and cell count; with_cells adds the supports.
Json ToJson(const RegularDecomposition& dec, bool with_cells = false);
Json ToJson(const ScaleDecomposition& dec);
Json ToJson(const VerificationReport& rep);
Json ToJson(const MultiscaleResult& r);
Json ToJson(const EntropyBound& b);
Json ToJson(const Energy& e);
Json ToJson(const DecayFit& f);
Json ToJson(const KaufmanReport& r);
Json ToJson(const FalconerReport& r);
Json ToJson(const HeavyStructure& h);
Json ToJson(const RadialReport& r);
Json ToJson(const FamilyBounds& b);
Json ToJson(const IncidenceResult& r);
Json ToJson(const AuditReport& r);
Json ToJson(const Quantiles& q);
Json ToJson(const Sweep& s);
Json ToJson(const PinSweep& s);

// kParseError with the parser's position on failure.
Json ParseJson(const std::string& text);
// kIoError if the file cannot be read or written.
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace frostlab
