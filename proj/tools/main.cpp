#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "cli_common.hpp"
#include "convnote/error.hpp"

// Exit codes: 0 success, 2 parse/usage errors, 3 validation errors,
// 4 config errors, 1 training failures and anything else.
int main(int argc, char** argv) {
    CLI::App app{"conversation-to-note toolkit"};
    app.require_subcommand(1);
    convnote::cli::register_data_commands(app);
    convnote::cli::register_model_commands(app);
    convnote::cli::register_notes_commands(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const convnote::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const convnote::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 4;
    } catch (const convnote::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 3;
    } catch (const convnote::TrainingError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
