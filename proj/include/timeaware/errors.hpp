#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace timeaware {

// Bad flags, unknown schema tags, partition specs that reference missing
// fields. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Anything wrong with the data itself. The CLI maps these to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, const std::string& what)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ValidationError : public DataError {
public:
    ValidationError(std::string record_id, const std::string& what)
        : DataError("record " + record_id + ": " + what), record_id_(std::move(record_id)) {}
    const std::string& record_id() const noexcept { return record_id_; }

private:
    std::string record_id_;
};

class EmptyPartitionError : public DataError {
public:
    using DataError::DataError;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateSampleError : public DataError {
public:
    using DataError::DataError;
};

class SingularDesignError : public DataError {
public:
    SingularDesignError(std::string what, std::vector<std::string> columns)
        : DataError(std::move(what)), columns_(std::move(columns)) {}
    const std::vector<std::string>& dependent_columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

class NoFoldsError : public DataError {
public:
    using DataError::DataError;
};

// Caller misuse of an otherwise valid API (mixed inputs, nothing to compare).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace timeaware
