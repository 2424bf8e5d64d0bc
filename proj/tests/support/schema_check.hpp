#pragma once

// Minimal JSON-Schema checker covering the subset the shipped schema uses:
// type (string or array), required, properties, enum, items, anyOf and
// "$ref": "#/definitions/...". Returns the first violation as a path+message.

#include <optional>
#include <string>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

inline bool type_matches(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

inline std::optional<std::string> validate(const json& value, const json& schema,
                                           const json& root, const std::string& path = "$") {
    if (schema.contains("$ref")) {
        std::string ref = schema["$ref"].get<std::string>();
        if (ref.rfind("#/", 0) != 0) return path + ": unsupported $ref " + ref;
        const json* target = &root;
        std::string rest = ref.substr(2);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            std::size_t next = rest.find('/', pos);
            std::string key = rest.substr(pos, next == std::string::npos ? next : next - pos);
            if (!target->contains(key)) return path + ": dangling $ref " + ref;
            target = &(*target)[key];
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        return validate(value, *target, root, path);
    }

    if (schema.contains("anyOf")) {
        for (const json& option : schema["anyOf"])
            if (!validate(value, option, root, path)) return std::nullopt;
        return path + ": no anyOf branch matched";
    }

    if (schema.contains("type")) {
        const json& type = schema["type"];
        bool ok = false;
        if (type.is_string()) {
            ok = type_matches(value, type.get<std::string>());
        } else {
            for (const json& t : type) ok = ok || type_matches(value, t.get<std::string>());
        }
        if (!ok) return path + ": type mismatch (wanted " + type.dump() + ")";
    }

    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& candidate : schema["enum"]) ok = ok || candidate == value;
        if (!ok) return path + ": value " + value.dump() + " not in enum";
    }

    if (value.is_object()) {
        if (schema.contains("required"))
            for (const json& key : schema["required"])
                if (!value.contains(key.get<std::string>()))
                    return path + ": missing required key " + key.get<std::string>();
        if (schema.contains("properties"))
            for (auto& [key, subschema] : schema["properties"].items())
                if (value.contains(key))
                    if (auto err = validate(value[key], subschema, root, path + "." + key))
                        return err;
    }

    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i)
            if (auto err = validate(value[i], schema["items"], root,
                                    path + "[" + std::to_string(i) + "]"))
                return err;
    }

    return std::nullopt;
}

/// Validate a CLI document against the subcommand's schema in the shipped file.
inline std::optional<std::string> validate_document(const json& document, const json& schema_file,
                                                    const std::string& subcommand) {
    if (!schema_file.contains("documents") || !schema_file["documents"].contains(subcommand))
        return "schema file has no document schema for " + subcommand;
    return validate(document, schema_file["documents"][subcommand], schema_file);
}

}  // namespace schema_check
