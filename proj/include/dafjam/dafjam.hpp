#pragma once

// Core DSP and simulation headers. The control service (Boost.Beast) lives in
// dafjam/control/ and is included separately.

#include "dafjam/acoustic_simulator.hpp"
#include "dafjam/audio_buffer.hpp"
#include "dafjam/correlation.hpp"
#include "dafjam/delay_engine.hpp"
#include "dafjam/device_model.hpp"
#include "dafjam/error.hpp"
#include "dafjam/fixtures.hpp"
#include "dafjam/gain.hpp"
#include "dafjam/json_io.hpp"
#include "dafjam/modulation.hpp"
#include "dafjam/physics.hpp"
#include "dafjam/sweep.hpp"
#include "dafjam/triple_buffer.hpp"
#include "dafjam/wav.hpp"
