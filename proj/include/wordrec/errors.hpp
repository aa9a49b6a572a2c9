#pragma once

#include <stdexcept>
#include <string>

namespace wordrec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// audio / dataset
struct MalformedContainer : Error { using Error::Error; };
struct UnsupportedEncoding : Error { using Error::Error; };
struct EmptyAudio : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct EmptyClass : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

// feature extraction
struct InvalidConfig : Error { using Error::Error; };
struct DegenerateBand : Error { using Error::Error; };

// nn / models
struct ShapeMismatch : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct UnsupportedShape : Error { using Error::Error; };
struct UnknownArchitecture : Error { using Error::Error; };
struct BadCheckpoint : Error { using Error::Error; };

// training / reports
struct TooFewExamples : Error { using Error::Error; };
struct BadCache : Error { using Error::Error; };
struct MalformedReport : Error { using Error::Error; };

}  // namespace wordrec
