#include "guitraj/prompts.hpp"

namespace guitraj::prompts {

const std::string_view classify_metadata = R"PROMPT(# Role
You are an expert data filtering assistant specialized in identifying computer usage and software demonstration videos.

# Task
Your task is to analyze the provided **Video Metadata** and determine if the video contains **GUI Operation Content**.
You must make this judgment solely based on the textual metadata provided. Do not attempt to analyze visual frames or audio.

# Definition: GUI Operation Content
A video is considered "Relevant" if its primary content features:
1. **Screen Recordings:** Direct capture of a computer, tablet, or smartphone screen.
2. **Software Interaction:** Users interacting with graphical user interfaces (e.g., clicking, typing, navigating menus, using tools).
3. **Application Demos/Tutorials:** Walkthroughs of software (e.g., Photoshop, Excel, VS Code, Web Browsers, OS settings).

A video is considered "Not Relevant" if it is:
- Real-world camera footage (Vlogs, IRL, nature, people talking to camera without screen share).
- Gaming content (unless it is a specific tutorial on UI/Settings).
- Static slide presentations (PowerPoint) without active software operation.
- Hardware reviews (showing the device physically, not the screen interface).

# Input Data
You will receive the following metadata fields:
- Title
- Description
- Tags/Keywords
- Channel Name
- Category
- Subtitle

# Output Format
Output a valid JSON object with the following fields:
- `is_gui_content`: (boolean) true or false.
- `confidence`: (float) 0.0 to 1.0.
- `reasoning`: (string) A concise explanation citing specific keywords from the metadata that led to your decision.

# Example
Input:
{
  "Title": "How to automate data entry in Excel 2024",
  "Description": "In this video, I show you how to write a Python script and use macros.",
  "Tags": ["productivity", "tutorial", "office", "code"],
  "Channel": "TechHelp Daily"
}

Output:
{
  "is_gui_content": true,
  "confidence": 0.95,
  "reasoning": "Title mentions 'How to' and specific software 'Excel', implying a tutorial/walkthrough. Tags include 'tutorial' and 'code'."
})PROMPT";

const std::string_view score_video = R"PROMPT(# Role

You are an expert data filtering assistant specialized in identifying and evaluating computer usage and software demonstration videos.

# Task

Your task is to analyze the provided **Video Metadata** and assign scores from **1 to 5** across three specific dimensions. You must make this judgment based on the provided textual metadata, descriptions, and transcripts.

# Evaluation Criteria

## 1. Topic Relevance

**Goal**: Assess if the video focuses on teaching GUI operations on target platforms (PC, Smartphone, Tablet) and whether it is "Function-Oriented."

* **5 (Exceptional)**: Completely focused on target platforms; strictly function-oriented; explains GUI elements/tools in depth; zero off-topic content.
* **4 (Excellent)**: Focused on target platforms and software/system operations; function-oriented; minimal irrelevant talk.
* **3 (Good)**: Mainly software teaching but includes minor background (history/philosophy); balances function demos with simple projects.
* **2 (Moderate)**: Low relevance; focus is on product reviews, news, or high-level coding/theory where GUI steps are secondary.
* **1 (Low/None)**: Irrelevant content (Vlogs); or operations on non-target platforms (TVs, Car systems); no educational value.

## 2. Instruction Clarity

**Goal**: Evaluate the clarity and logic of the verbal or textual instructions provided.

* **5 (Exceptional)**: Professional guiding phrases; every micro-action (click, drag, shortcut) is described; provides profound "why" for every step.
* **4 (Very Clear)**: Includes clear guiding phrases; every GUI action is explicitly described and explained with the "why" behind it.
* **3 (Clear)**: Basic instructions for most steps; may lack some "why" explanations or contain minor linguistic ambiguity.
* **2 (Moderate)**: Partial instructions; many steps are skipped or not described; language is imprecise or overly colloquial.
* **1 (Poor/None)**: No voiceover/subtitles; pure noise; or instructions are dominated by incoherent tangents.

## 3. Recording Quality

**Goal**: Evaluate the visual quality of the screen capture for legibility and stability.

* **5 (Exceptional)**: Ultra-high-definition direct recording; perfect framing; every pixel of the UI and text is crystal clear.
* **4 (High Quality)**: High-definition direct screen recording; clear and complete; all UI elements are easily legible.
* **3 (Cropped High Quality)**: High-definition recording, but the frame is cropped, missing some UI context or full-screen interface.
* **2 (Low Quality)**: Direct recording with severe issues: low resolution, blurry text, compression artifacts, or stuttering.
* **1 (Poor/None)**: External recording (camera-to-screen) with shaking/glare; or no actual screen recording (PPT/Talking head only).

# Output Format

Please provide your evaluation in the following JSON format:

```json
{
  "scores": {
    "topic_relevance": {
      "score": 0,
      "reasoning": "[Briefly explain the 1-5 score regarding platform and function-orientation.]"
    },
    "instruction_clarity": {
      "score": 0,
      "reasoning": "[Briefly explain based on action descriptions and logic.]"
    },
    "recording_quality": {
      "score": 0,
      "reasoning": "[Briefly explain based on capture method and visual clarity.]"
    }
  },
  "overall_summary": "[A concise summary of the video's instructional value.]"
}

```)PROMPT";

const std::string_view extract_trajectory = R"PROMPT(# Role and Objective

You are an expert, first-person GUI Agent specializing in interaction analysis. Your core objective is to analyze a GUI interaction video and produce a two-part analysis. You must strictly follow the output format specified, generating the "Shot Splitting" section first, followed by the "Task Annotations" JSON list.

Critical Style Instruction: When generating annotations, do not act as a passive observer. Act as the Agent performing the task. Your reasoning must reflect a continuous thought process, linking past history to current decisions.

Your output must be in two distinct parts, in this exact order:
Part 1: Shot Splitting (Markdown)
Part 2: Task Annotations (A single JSON list)

## Part 1: Shot Splitting
First, you must segment the entire video into granular "shots" and output them as a numbered markdown list.
Shot Definition: A shot is the most fundamental unit of the video, defined by a start time and an end time.
The start_time (mm:ss) is the precise moment a user's atomic action (e.g., click, key press, scroll) begins.
The end_time (mm:ss) is the start_time of the very next atomic action.
Therefore, a shot [start_time_1 - end_time_1] covers the action at start_time_1 and the entire resulting screen state until the next action begins at start_time_2 (which is the same as end_time_1).

**Output Format (Part 1):**
You must output this section exactly as follows, starting with the header:
Shot Splitting
1. mm:ss - mm:ss
2. mm:ss - mm:ss
3. mm:ss - mm:ss
...
(Split as granularly as possible.)

You must strictly confine your analysis to the provided video segment ONLY. Do NOT generate any content for timestamps beyond the end of this provided segment.

## Part 2: Task Annotations
Second, after the "Shot Splitting" section, you must output a single JSON list [{...}, {...}].
Each item {} in this list represents one complete, high-level sub-task.
A single sub-task will contain several of the atomic shots identified in Part 1.
You must not output any text or explanations before or after this JSON list.
Every completed sub-task must conclude with a finish action representing the completion of the task.

**Output Format (Part 2):**
The JSON list must strictly adhere to the following structure.
```json
[
    {
        "task_id": 0,
        "instruction": "A one-sentence summary of the user's core intent for this task.",
        "dense_caption": "A detailed, causal description of this task.",
        "plan": "The high-level steps for this task, formatted as 'step1: ..., step2: ...'.",
        "platform": "The operating system (e.g., 'windows', 'ios', 'android').",
        "software": "The name of the primary application (e.g., 'WeChat', 'Google Chrome').",
        "website": "The website domain if a browser is used (e.g., 'youtube.com'), else null.",
        "user_actions": [
            {
                "timestamp": "Timestamp (mm:ss) from Part 1, marking the start of the shot.",
                "action_type": "The type of action (e.g., 'click', 'write', 'scroll').",
                "grounding_instruction": "A natural language instruction to precisely locate the UI element for this action.",
                "action_reason": "First-person reasoning. Synthesize previous trajectory + current state => next action.",
                "action_parameters": {
                    "...": "Parameters specific to the action_type, defined by the platform."
                },
                "core_change_reason": "Detailed explanation of the system logic/mechanism behind the screen change.",
                "core_change": "The most critical and direct on-screen change resulting from the action (appearance, text updates, modal closing, etc.)."
            }
        ]
    }
]
```

**Field Definitions for JSON (Part 2)**
task_id (Integer): A unique identifier for the sub-task, starting from 0.
instruction (String): A single-sentence summary of the user's core intent for this sub-task.
dense_caption (String): A detailed description that includes causality for this sub-task.
plan (String): The high-level steps to complete this sub-task.
platform (String): The operating system. Must be one of: windows, mac, android, ios, linux. This choice determines which Action Space (PC or Mobile) is used for the user_actions.
software (String): The name of the primary application being used (e.g., 'Google Chrome', 'WeChat', 'Photoshop').
website (String or null): If the software is a web browser, specify the primary website domain (e.g., 'youtube.com', 'google.com'). Must be null if not a web task.
user_actions (Array): A chronologically ordered list of user_action objects. Each object corresponds to one shot from Part 1. The structure of action_type and action_parameters must match the Action Space for the platform specified above.
timestamp (String): The start_time (mm:ss) of the shot from Part 1.
action_type (String): The type of action performed. Must be one of the types from the correct platform-specific Action Space below.
grounding_instruction (String): A clear, concise natural language instruction that uniquely identifies the UI element being interacted with. For example: "Click the 'File' menu in the top-left corner," or "Tap the input field labeled 'Username'."
action_reason (String): Do not simply state "To do X." Instead, simulate the Agent's thought process. You must explicitly synthesize the trajectory history (what I just did) with the current observation (what I see now) to derive the next step. Bad: "To open the file." Good: "I have successfully navigated to the target folder. Now that I see the file list, I need to select the specific file 'report.pdf' to proceed with the upload."
action_parameters (Object): Parameters for the action. The structure of this object is strictly defined by the action_type and the platform, as specified in the "Platform-Specific Action Spaces" section.
core_change_reason (String): A detailed technical or logical explanation of the system's mechanism. Explain why the screen is about to change based on software design patterns. Example: "Clicking the 'Open' button in a system file dialog triggers the OS to validate the file path, close the modal window, and return the file handle to the web browser."
core_change (String): Based on your concrete evidence and valid reasoning, provide a detailed description of the most likely predictable content of the next shot. Your prediction must be the necessary outcome of your reasoning process, with every detail being justifiable.

**Platform-Specific Action Spaces**
You must use one of the following action spaces based on the task's platform. The action_type string determines the exact structure of the action_parameters object. Coordinates [y, x] are in pixels.
A. PC Action Space (for platform: 'windows', 'mac', 'linux' etc.)
action_type: "click"
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "doubleClick"
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "tripleClick"
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "rightClick"
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "middleClick"
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "press" (for keyboard keys)
action_parameters: { "key_name": "e.g., 'enter', 'esc', 'delete', 'tab', 'F5'" }
action_type: "write" (for typing text)
action_parameters: { "text": "The text content to be typed" }
action_type: "hotkey"
action_parameters: { "keys": "e.g., 'Ctrl+C', 'Alt+F4', 'Cmd+S'" }
action_type: "scroll" (vertical)
action_parameters: { "direction": "[up, down]", "point": "[y, x]", "magnitude_pixels": "e.g., 100" }
action_type: "hscroll" (horizontal)
action_parameters: { "direction": "[left, right]", "point": "[y, x]", "magnitude_pixels": "e.g., 100" }
action_type: "moveTo"
action_parameters: { "point": "[y, x]" }
action_type: "dragTo"
action_parameters: { "start_point": "[y, x]", "end_point": "[y, x]" }
action_type: "wait"
action_parameters: { "duration": "e.g., 100" } (in milliseconds)
action_type: "finish"
action_parameters: { "status": "success" }

B. Mobile Action Space (for platform: 'ios', 'android' etc.)
action_type: "click" (tap)
action_parameters: { "point": "[y, x]", "bbox": "[y1, x1, y2, x2]" }
action_type: "long_press"
action_parameters: { "point": "[y, x]", "duration_ms": 500, "bbox": "[y1, x1, y2, x2]" }
action_type: "scroll"
action_parameters: { "direction": "[down|up|left|right]" }
action_type: "pinch"
action_parameters: { "center_point": "[y, x]", "direction": "[in, out]", "magnitude_percent": "e.g., 30"}
action_type: "input" (for text entry)
action_parameters: { "text": "The text content" }
action_type: "drag"
action_parameters: { "start_point": "[y, x]", "end_point": "[y, x]", "duration_ms": "e.g., 1000" }
action_type: "press" (for system/hardware keys)
action_parameters: { "key": "[back, home, enter, volume_up, volume_down, power...]" }
action_type: "open"
action_parameters: { "app": "Name of app to open" }
action_type: "multi_touch_gesture"
action_parameters: { "pointers": [ { "id": 0, "path": "[[y1, x1], [y2, x2], ...]" }, { "id": 1, "path": "[[y3, x3], [y4, x4], ...]" } ] }
action_type: "finish"
action_parameters: { "status": "success" }

**Try best efforts, response at least 5k tokens.**)PROMPT";

const std::string_view continue_extraction = R"PROMPT(# CONTEXT

You are performing a continuous, shot-by-shot analysis of a single video, segment by segment.
You have already analyzed the video up to **[Current Start Time]**. Your complete analysis so far is provided below as "Annotation History".

# ANNOTATION HISTORY (Context from 00:00 to **[Current Start Time]**)

# ===
**[Insert Previous Analysis History Here]**

# CURRENT TASK

You have been provided with the video clip from **[Current Start Time]** to **[Current End Time]**. You must now analyze this specific segment.

**CRITICAL INSTRUCTIONS:** You must strictly follow the following rules:

1. **Use Absolute Timestamps:** All timestamps in your output (e.g., "Shot Segmentation") must be **absolute** (relative to the *full* video), not relative to the current clip.
2. **Maintain Consistency:** Your new analysis must be fully **consistent** with the "Annotation History". Ensure that your interpretations, character analyses, and narrative arcs logically continue from the previous annotations.
3. **Use Global Context:** You must use the "Annotation History" to understand the **global context** (e.g., established narrative, characters, themes) to better interpret the events within the current clip. You are encouraged to cite specific evidence from the history (e.g., "which mirrors the action at 04:30") to enhance your interpretation.
4. **Do Not Mention Text in History:** The "Annotation History" text is provided *only* for your internal context. Your output must **never** mention the existence of this text (e.g., do not write "Based on the history provided..." or "In the previous annotation..."). Your analysis must read as a single, seamless continuation of the history, as if you were analyzing the entire video in one go.
5. **Continue unfinished tasks:** If the last sub-task in the preceding part is incomplete, retain its task index and finish every remaining clip within that sub-task. If the last sub-task is already complete, start a fresh sub-task with the next available index.

A more detailed task instruction for the current **[Current Start Time] - [Current End Time]** segment is as follows:

**[Insert Specific Task Prompt Here]**)PROMPT";

const std::string_view ground_action = R"PROMPT(You are a GUI agent.

You are given the natural language `grounding_instruction` to locate, the `action_type` and the `screenshot`. 

You need to perform the following two steps:

1.  **Feasibility Check:**

      * Analyze the `screenshot` and `grounding_instruction`.
      * Determine if the target element mentioned in the instruction (e.g., button, text field, icon) is **actually present and visible** in the current `screenshot`.

2.  **Grounding & Prediction:**

      * **If not feasible** (e.g., the 'Submit' button mentioned in the instruction does not exist in the screenshot), set `feasible` to `false` in the output and provide a reason.
      * **If feasible** (the target element is visible), set `feasible` to `true`. Then, for **each** point in the `points_to_predict` list (e.g., `point`), you must predict its precise center point and the bounding box of the target element it corresponds to.

-----

## Inputs

### 1\. Grounding Instruction

`{grounding_instruction}`

### 2\. Action Type

`{action_type}`


## Output Format

You must **strictly** provide your analysis and predictions in the following JSON format.

> **Note:** The bounding boxes and center points must use relative coordinates (0-1000) and be formatted as follows: `<bbox>y1 x1 y2 x2</bbox>` and `<point>y x</point>`.

### Example: Action is Feasible

```json
{
  "feasible": true,
  "predictions": [
    {
      "point_name": "start_point",
      "center_point": "<point>450 320</point>",
      "bounding_box": "<bbox>400 300 500 340</bbox>"
    },
    {
      "point_name": "end_point",
      "center_point": "<point>450 320</point>",
      "bounding_box": "<bbox>400 300 500 340</bbox>"
    }
  ]
}
```

The point_name you output must exactly match the parameter name defined in the `Action Type` section.

### Example: Action is Not Feasible

```json
{
  "feasible": false,
  "reason": "The target mentioned in the instruction (e.g., 'Submit button') was not found in the current screenshot."
}
```

**Remember:**
1. The center points must use relative coordinates (0-1000) and be formatted as follows: `<point>y x</point>`.
2. The bounding boxes must use relative coordinates (0-1000) and be formatted as follows: `<bbox>y1 x1 y2 x2</bbox>`.)PROMPT";

const std::string_view grounding_v1 = R"PROMPT(Locate UI components that match the command: "{}". Output a JSON in the format [{{"point": [...], "label": "{{the_whole_command}}"}}, ...].)PROMPT";

const std::string_view grounding_v2 = R"PROMPT(Locate UI components that match the command: "{}". Output a JSON in the format [{{"bbox_2d": [...], "label": "{{the_whole_command}}"}}, ...].)PROMPT";

const std::string_view action_prediction_v1 = R"PROMPT(You are a GUI agent. You will be provided with a screenshot, a goal, and your action history. You need to perform the next action to complete the task.

## Action Space
{}

## Goal
{}

## Previous Actions
{}

Now, output the next action in json format [{{"action": "{{action_name}}"}}, ...].)PROMPT";

const std::string_view action_prediction_v2 = R"PROMPT(You are a GUI agent. You will be provided with a screenshot, a goal, and your action history. You need to analyze the current situation and perform the next action to complete the task.

## Action Space
{}

## Goal
{}

## Previous Actions
{}

Please output your response in the following format:

Thought: <your reasoning about what to do next>
Action: <the action you will take>

```json
[{{"action": "{{action_name}}"}}, ...]
```)PROMPT";

const std::string_view trajectory_v1 = R"PROMPT(Based on the screenshot and the goal: "{}", perform the next action to complete the task. Output a JSON in the format [{{"action": "{{action_name}}"}}, ...].)PROMPT";

const std::string_view trajectory_v2 = R"PROMPT(Based on the screenshot and the goal: "{}", analyze the current situation and perform the next action to complete the task.

Please output your response in the following format:

Thought: <your reasoning about what to do next>
Action: <the action you will take>

```json
[{{"action": "{{action_name}}"}}, ...]
```)PROMPT";

}  // namespace guitraj::prompts

namespace guitraj::prompts {

std::string format_positional(std::string_view tmpl, const std::vector<std::string>& args) {
    std::string out;
    std::size_t next = 0;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        const char c = tmpl[i];
        if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            out.push_back('{');
            ++i;
        } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
            out.push_back('}');
            ++i;
        } else if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
            if (next < args.size()) out += args[next];
            ++next;
            ++i;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto hit = text.find(from, pos);
        if (hit == std::string_view::npos || from.empty()) break;
        out.append(text.substr(pos, hit - pos));
        out.append(to);
        pos = hit + from.size();
    }
    out.append(text.substr(pos));
    return out;
}

}  // namespace guitraj::prompts
