"""Defines utility functions for configuration handling and for writing the
   output files."""

import csv
import json
import os
import tempfile

from . import Exceptions

__all__ = [ "AttributeName", "FormatValue", "KeyName", "LoadConfig",
        "SetOptions", "WriteCsv", "WriteJson" ]

def AttributeName(keyName):
    """Return the attribute name (camelCase) for a configuration key
       (snake_case)."""
    parts = keyName.replace("-", "_").split("_")
    return parts[0] + "".join(p[:1].upper() + p[1:] for p in parts[1:])


def KeyName(attributeName):
    """Return the configuration key (snake_case) for an attribute name."""
    chars = []
    for char in attributeName:
        if char.isupper():
            chars.append("_")
            char = char.lower()
        chars.append(char)
    return "".join(chars)


def SetOptions(obj, options):
    """Set values on the object from the options, which may be a mapping of
       configuration keys or an object with attributes; values that are None
       and names the object does not have are ignored."""
    if not options:
        return
    if isinstance(options, dict):
        items = [(AttributeName(k), v) for k, v in options.items()]
    else:
        items = [(a, getattr(options, a)) for a in dir(options) \
                if not a.startswith("_")]
    for attribute, value in items:
        if value is None or not hasattr(obj, attribute):
            continue
        if callable(getattr(obj, attribute)):
            continue
        setattr(obj, attribute, value)


def LoadConfig(fileName, validKeys):
    """Load the configuration document and return its values as a
       dictionary; keys not in the list of valid keys are rejected."""
    try:
        with open(fileName, encoding = "utf-8") as inFile:
            values = json.load(inFile)
    except (OSError, ValueError) as error:
        raise Exceptions.ConfigurationError(
                reason = "cannot read %s: %s" % (fileName, error))
    if not isinstance(values, dict):
        raise Exceptions.ConfigurationError(
                reason = "%s must contain a JSON object" % fileName)
    unknownKeys = sorted(k for k in values if k not in validKeys)
    if unknownKeys:
        raise Exceptions.ConfigurationError(
                reason = "unknown keys in %s: %s" % \
                        (fileName, ", ".join(unknownKeys)))
    return values


def FormatValue(value):
    """Return the value formatted for output; floats keep 17 significant
       digits so they read back exactly."""
    if isinstance(value, float):
        return "%.17g" % value
    if hasattr(value, "dtype") and value.dtype.kind == "f":
        return "%.17g" % float(value)
    return str(value)


def _AtomicWrite(fileName, writer):
    dirName = os.path.dirname(os.path.abspath(fileName))
    os.makedirs(dirName, exist_ok = True)
    fd, tempName = tempfile.mkstemp(dir = dirName, prefix = ".tmp_")
    try:
        with os.fdopen(fd, "w", encoding = "utf-8", newline = "") as outFile:
            writer(outFile)
        os.replace(tempName, fileName)
    except:
        os.unlink(tempName)
        raise


def WriteCsv(fileName, header, rows):
    """Write the rows to the file as comma delimited text with a header."""
    def Writer(outFile):
        csvWriter = csv.writer(outFile, lineterminator = "\n")
        csvWriter.writerow(header)
        for row in rows:
            csvWriter.writerow([FormatValue(v) for v in row])
    _AtomicWrite(fileName, Writer)


def WriteJson(fileName, value):
    """Write the value to the file as JSON with sorted keys."""
    def Writer(outFile):
        json.dump(value, outFile, indent = 2, sort_keys = True)
        outFile.write("\n")
    _AtomicWrite(fileName, Writer)
