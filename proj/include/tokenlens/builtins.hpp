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

#include <set>
#include <string>

namespace tokenlens {

/// Python 3 builtin callables. Kept identical to data/builtins.txt.
inline const std::set<std::string>& default_builtins() {
  static const std::set<std::string> kNames = {
      "abs", "aiter", "all", "anext", "any", "ascii", "bin", "breakpoint", "callable", "chr", "compile",
      "delattr", "dir", "divmod", "eval", "exec", "format", "getattr", "globals", "hasattr", "hash", "help",
      "hex", "id", "input", "isinstance", "issubclass", "iter", "len", "locals", "max", "min", "next", "oct",
      "open", "ord", "pow", "print", "repr", "round", "setattr", "sorted", "sum", "vars", "__import__",
      "bool", "bytearray", "bytes", "classmethod", "complex", "dict", "enumerate", "filter", "float",
      "frozenset", "int", "list", "map", "memoryview", "object", "property", "range", "reversed", "set",
      "slice", "staticmethod", "str", "super", "tuple", "type", "zip", "BaseException", "BaseExceptionGroup",
      "Exception", "ExceptionGroup", "ArithmeticError", "AssertionError", "AttributeError", "BlockingIOError",
      "BrokenPipeError", "BufferError", "ChildProcessError", "ConnectionAbortedError", "ConnectionError",
      "ConnectionRefusedError", "ConnectionResetError", "EOFError", "EnvironmentError", "FileExistsError",
      "FileNotFoundError", "FloatingPointError", "GeneratorExit", "IOError", "ImportError",
      "IndentationError", "IndexError", "InterruptedError", "IsADirectoryError", "KeyError",
      "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError", "NameError",
      "NotADirectoryError", "NotImplementedError", "OSError", "OverflowError", "PermissionError",
      "ProcessLookupError", "RecursionError", "ReferenceError", "RuntimeError", "StopAsyncIteration",
      "StopIteration", "SyntaxError", "SystemError", "SystemExit", "TabError", "TimeoutError", "TypeError",
      "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError", "UnicodeError",
      "UnicodeTranslateError", "ValueError", "ZeroDivisionError", "BytesWarning", "DeprecationWarning",
      "EncodingWarning", "FutureWarning", "ImportWarning", "PendingDeprecationWarning", "ResourceWarning",
      "RuntimeWarning", "SyntaxWarning", "UnicodeWarning", "UserWarning", "Warning"
  };
  return kNames;
}

}  // namespace tokenlens
